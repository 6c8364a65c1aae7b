#pragma once

// Run configuration: a JSON document, with command-line flags merged on top
// as a second document before validation.

#include "json.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmw/catalog_json.hpp"
#include "cmw/errors.hpp"
#include "cmw/model.hpp"

namespace cmw {

struct Tolerances {
    double solve = 1e-10;        // residual total at convergence
    double certificate = 1e-8;   // residual bound for the vanishing certificate
    double phi = 1e-8;           // sup |Phi| below which a state counts as reducible
    int max_iter = 200;
};

struct RunConfig {
    std::string command;
    nlohmann::json model_doc = "heisenberg";
    ModelStructure model = heisenberg();
    std::optional<Rational> eps;
    std::vector<Rational> eps_list;
    std::string backend = "invariant";
    int N = 16;
    std::uint64_t seed = 0;
    bool constraint = false;
    Tolerances tol;
    std::string output;      // JSON report path; empty: standard output
    std::string csv;         // sweep CSV path
    std::string checkpoint;  // grid checkpoint base path; empty: none
    std::string init;        // grid checkpoint to start a solve from; empty: seeded state
};

inline const std::vector<std::string>& config_commands() {
    static const std::vector<std::string> c{"derive", "check", "curvature", "solve", "sweep"};
    return c;
}

namespace detail {

[[noreturn]] inline void config_fail(const std::string& field, const std::string& msg) {
    throw ConfigError("field '" + field + "': " + msg);
}

inline Rational config_rational(const nlohmann::json& v, const std::string& field) {
    try {
        return rational_from_json(v, field);
    } catch (const std::exception& e) {
        config_fail(field, e.what());
    }
}

inline std::string config_string(const nlohmann::json& v, const std::string& field) {
    if (!v.is_string()) config_fail(field, "must be a string");
    return v.get<std::string>();
}

inline double config_positive(const nlohmann::json& v, const std::string& field) {
    if (!v.is_number()) config_fail(field, "must be a number");
    const double x = v.get<double>();
    if (!(x > 0)) config_fail(field, "must be positive");
    return x;
}

}  // namespace detail

// Merge: every key present in overlay replaces the one in base; the
// "tolerances" object is merged key by key.
inline nlohmann::json merge_config(nlohmann::json base, const nlohmann::json& overlay) {
    if (base.is_null()) base = nlohmann::json::object();
    if (!base.is_object()) throw ConfigError("configuration document must be a JSON object");
    for (const auto& [k, v] : overlay.items()) {
        if (k == "tolerances" && base.contains(k) && base[k].is_object() && v.is_object())
            for (const auto& [tk, tv] : v.items()) base[k][tk] = tv;
        else
            base[k] = v;
    }
    return base;
}

inline RunConfig parse_config(const nlohmann::json& doc) {
    using detail::config_fail;
    if (!doc.is_object()) throw ConfigError("configuration document must be a JSON object");
    static const std::vector<std::string> known{"command", "model", "eps", "eps_list", "backend", "N", "seed",
                                                "constraint", "tolerances", "output", "csv", "checkpoint", "init"};
    for (const auto& [k, v] : doc.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) config_fail(k, "unknown field");

    RunConfig cfg;
    if (!doc.contains("command")) config_fail("command", "missing");
    cfg.command = detail::config_string(doc["command"], "command");
    const auto& cmds = config_commands();
    if (std::find(cmds.begin(), cmds.end(), cfg.command) == cmds.end())
        config_fail("command", "unknown command '" + cfg.command + "'");

    if (doc.contains("model")) cfg.model_doc = doc["model"];
    try {
        cfg.model = model_from_json(cfg.model_doc);
    } catch (const std::exception& e) {
        config_fail("model", e.what());
    }

    if (doc.contains("eps") && !doc["eps"].is_null()) {
        cfg.eps = detail::config_rational(doc["eps"], "eps");
        if (!(*cfg.eps > 0)) config_fail("eps", "must be positive");
    } else if (cfg.command == "derive" || cfg.command == "check" || cfg.command == "curvature") {
        cfg.eps = Rational(1);
    }

    if (doc.contains("eps_list")) {
        const auto& l = doc["eps_list"];
        if (!l.is_array()) config_fail("eps_list", "must be an array of rationals");
        for (std::size_t i = 0; i < l.size(); ++i) {
            const std::string f = "eps_list[" + std::to_string(i) + "]";
            cfg.eps_list.push_back(detail::config_rational(l[i], f));
            if (!(cfg.eps_list.back() > 0)) config_fail(f, "must be positive");
            if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1])) config_fail("eps_list", "must be strictly decreasing");
        }
    }
    if (cfg.command == "sweep") {
        if (cfg.eps_list.empty()) config_fail("eps_list", "required and nonempty for sweep");
        if (cfg.eps) config_fail("eps", "not used by sweep; give eps_list");
    }

    if (doc.contains("backend")) cfg.backend = detail::config_string(doc["backend"], "backend");
    if (cfg.backend != "invariant" && cfg.backend != "heis-grid")
        config_fail("backend", "must be 'invariant' or 'heis-grid'");
    if (doc.contains("N")) {
        if (!doc["N"].is_number_integer()) config_fail("N", "must be an integer");
        cfg.N = doc["N"].get<int>();
    }
    if (cfg.backend == "heis-grid") {
        if (cfg.N <= 0 || cfg.N % 2 != 0) config_fail("N", "must be even and positive for heis-grid");
        if (!is_heisenberg(cfg.model)) config_fail("backend", "heis-grid needs the heisenberg model");
    }

    if (doc.contains("seed")) {
        const auto& v = doc["seed"];
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
            config_fail("seed", "must be a nonnegative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("constraint")) {
        if (!doc["constraint"].is_boolean()) config_fail("constraint", "must be a boolean");
        cfg.constraint = doc["constraint"].get<bool>();
    }

    if (doc.contains("tolerances")) {
        const auto& t = doc["tolerances"];
        if (!t.is_object()) config_fail("tolerances", "must be an object");
        for (const auto& [k, v] : t.items()) {
            const std::string f = "tolerances." + k;
            if (k == "solve") cfg.tol.solve = detail::config_positive(v, f);
            else if (k == "certificate") cfg.tol.certificate = detail::config_positive(v, f);
            else if (k == "phi") cfg.tol.phi = detail::config_positive(v, f);
            else if (k == "max_iter") {
                if (!v.is_number_integer() || v.get<int>() <= 0) config_fail(f, "must be a positive integer");
                cfg.tol.max_iter = v.get<int>();
            } else config_fail(f, "unknown tolerance");
        }
    }

    if (doc.contains("output")) cfg.output = detail::config_string(doc["output"], "output");
    if (doc.contains("csv")) cfg.csv = detail::config_string(doc["csv"], "csv");
    if (cfg.command == "sweep" && cfg.csv.empty()) {
        if (cfg.output.empty()) cfg.csv = "sweep.csv";
        else cfg.csv = std::filesystem::path(cfg.output).replace_extension(".csv").string();
    }
    if (doc.contains("checkpoint")) cfg.checkpoint = detail::config_string(doc["checkpoint"], "checkpoint");
    if (doc.contains("init")) cfg.init = detail::config_string(doc["init"], "init");
    if ((!cfg.checkpoint.empty() || !cfg.init.empty()) && cfg.backend != "heis-grid")
        config_fail(cfg.checkpoint.empty() ? "init" : "checkpoint", "grid checkpoints need backend heis-grid");
    if (!cfg.init.empty() && cfg.command != "solve") config_fail("init", "only used by solve");
    if (!cfg.checkpoint.empty() && cfg.command != "solve") config_fail("checkpoint", "only used by solve");
    return cfg;
}

// Effective configuration with every default spelled out.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["command"] = cfg.command;
    j["model"] = cfg.model_doc;
    j["eps"] = cfg.eps ? nlohmann::json(to_string(*cfg.eps)) : nlohmann::json(nullptr);
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : cfg.eps_list) list.push_back(to_string(e));
    j["eps_list"] = list;
    j["backend"] = cfg.backend;
    j["N"] = cfg.N;
    j["seed"] = cfg.seed;
    j["constraint"] = cfg.constraint;
    j["tolerances"] = {{"solve", cfg.tol.solve},
                       {"certificate", cfg.tol.certificate},
                       {"phi", cfg.tol.phi},
                       {"max_iter", cfg.tol.max_iter}};
    j["output"] = cfg.output;
    j["csv"] = cfg.csv;
    j["checkpoint"] = cfg.checkpoint;
    j["init"] = cfg.init;
    return j;
}

}  // namespace cmw
