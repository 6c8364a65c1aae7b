#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cmw/config.hpp"
#include "cmw/report.hpp"

namespace {

using nlohmann::json;

json model_argument(const std::string& text) {
    if (!text.empty() && text.front() == '{') return json::parse(text);
    if (std::filesystem::path(text).extension() == ".json" && std::filesystem::exists(text)) {
        std::ifstream f(text);
        return json::parse(f);
    }
    return text;
}

struct Flags {
    std::string config_file, model, eps, backend, output, csv, checkpoint, init;
    std::vector<std::string> eps_list;
    int n = 0;
    std::uint64_t seed = 0;
    bool constraint = false;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config_file, "JSON configuration file; flags override its fields");
    sub->add_option("--model,-m", f.model, "catalog name, inline JSON object, or path to a model .json file");
    sub->add_option("--output,-o", f.output, "report path (default: standard output)");
}

json overlay_from(CLI::App* sub, const Flags& f) {
    json o = json::object();
    o["command"] = sub->get_name();
    auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
    if (given("--model")) o["model"] = model_argument(f.model);
    if (given("--output")) o["output"] = f.output;
    if (given("--eps")) o["eps"] = f.eps;
    if (given("--eps-list")) o["eps_list"] = f.eps_list;
    if (given("--backend")) o["backend"] = f.backend;
    if (given("--N")) o["N"] = f.n;
    if (given("--seed")) o["seed"] = f.seed;
    if (given("--constraint-11")) o["constraint"] = f.constraint;
    if (given("--csv")) o["csv"] = f.csv;
    if (given("--checkpoint")) o["checkpoint"] = f.checkpoint;
    if (given("--init")) o["init"] = f.init;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contact monopole workbench: pseudohermitian invariants, spin^c Dirac operators, monopole solver"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(CMW_VERSION));
    Flags f;

    auto* derive = app.add_subcommand("derive", "pseudohermitian and Riemannian invariants of a model");
    add_common(derive, f);
    derive->add_option("--eps", f.eps, "adapted-metric parameter for the Riemannian data (default 1)");

    auto* check = app.add_subcommand("check", "Clifford axioms and connection compatibility suites");
    add_common(check, f);
    check->add_option("--eps", f.eps, "adapted-metric parameter (default 1)");

    auto* curvature = app.add_subcommand("curvature", "curvature of the trace connection");
    add_common(curvature, f);
    curvature->add_option("--eps", f.eps, "adapted-metric parameter (default 1)");

    auto* solve = app.add_subcommand("solve", "solve the monopole equations from a seeded state");
    add_common(solve, f);
    solve->add_option("--eps", f.eps, "solve the adiabatic system at this eps instead of the contact system");
    solve->add_option("--backend,-b", f.backend, "invariant | heis-grid");
    solve->add_option("--N", f.n, "grid points per axis (heis-grid)");
    solve->add_option("--seed", f.seed, "seed of the initial state");
    solve->add_flag("--constraint-11", f.constraint, "add the Reeb-derivative condition as equations");
    solve->add_option("--checkpoint", f.checkpoint, "write the solved grid fields to <base>.bin / <base>.json");
    solve->add_option("--init", f.init, "start from a grid checkpoint <base>");

    auto* sweep = app.add_subcommand("sweep", "warm-started adiabatic sweep over a decreasing eps list");
    add_common(sweep, f);
    sweep->add_option("--eps-list", f.eps_list, "strictly decreasing rationals, comma separated")->delimiter(',');
    sweep->add_option("--backend,-b", f.backend, "invariant | heis-grid");
    sweep->add_option("--N", f.n, "grid points per axis (heis-grid)");
    sweep->add_option("--seed", f.seed, "seed of the initial state");
    sweep->add_flag("--constraint-11", f.constraint, "add the Reeb-derivative condition as equations");
    sweep->add_option("--csv", f.csv, "CSV path (default: report path with .csv, or sweep.csv)");

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();

    cmw::RunConfig cfg;
    try {
        json base = json::object();
        if (!f.config_file.empty()) {
            std::ifstream in(f.config_file);
            if (!in) throw cmw::ConfigError("cannot read config file '" + f.config_file + "'");
            base = json::parse(in);
        }
        cfg = cmw::parse_config(cmw::merge_config(base, overlay_from(sub, f)));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return cmw::kExitConfigError;
    }

    try {
        const cmw::RunOutcome out = cmw::run_command(cfg);
        const std::string text = cmw::render_report(out.report);
        if (cfg.output.empty()) std::cout << text;
        else cmw::write_text_file(cfg.output, text);
        if (cfg.command == "sweep") cmw::write_text_file(cfg.csv, out.csv);
        return out.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error in '" << cfg.command << "' on model '" << cfg.model.name() << "': " << e.what() << "\n";
        return cmw::kExitConfigError;
    }
}
