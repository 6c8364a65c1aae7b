#pragma once

// Model documents:
//   {"name": "...", "p": "1/2", "q": "-1"}
//   {"name": "...", "c_0_12": "2", "c_1_02": "-2", ...}   (missing entries are 0)

#include "json.hpp"

#include <string>

#include "cmw/model.hpp"

namespace cmw {

inline Rational rational_from_json(const nlohmann::json& v, const std::string& field) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    throw ParseError("field '" + field + "' must be a rational string \"p/q\" or an integer");
}

inline ModelStructure model_from_json(const nlohmann::json& doc) {
    if (doc.is_string()) return catalog_model(doc.get<std::string>());
    if (!doc.is_object()) throw ParseError("model must be a name or an object");
    const std::string name = doc.value("name", std::string{});
    if (doc.contains("p") || doc.contains("q")) {
        if (!doc.contains("p") || !doc.contains("q")) throw ParseError("model needs both 'p' and 'q'");
        return make_gen(rational_from_json(doc["p"], "p"), rational_from_json(doc["q"], "q"), name);
    }
    StructureTable c{};
    for (auto& row : c) row.fill(Rational(0));
    bool any = false;
    for (const auto& [key, value] : doc.items()) {
        if (key == "name") continue;
        if (key.size() != 6 || key.rfind("c_", 0) != 0 || key[3] != '_')
            throw ParseError("unknown model field '" + key + "'");
        const int i = key[2] - '0';
        const int j = key[4] - '0';
        const int k = key[5] - '0';
        if (i < 0 || i > 2 || j < 0 || k > 2 || j >= k) throw ParseError("bad structure-constant key '" + key + "'");
        c[i][pair_index(j, k)] = rational_from_json(value, key);
        any = true;
    }
    if (!any) throw ParseError("model object has neither (p,q) nor c_i_jk entries");
    return make_model(c, name.empty() ? std::string("custom") : name);
}

inline nlohmann::json model_to_json(const ModelStructure& m) {
    nlohmann::json out;
    out["name"] = m.name();
    for (int i = 0; i < 3; ++i)
        for (const auto& [j, k] : kPairs)
            out["c_" + std::to_string(i) + "_" + std::to_string(j) + std::to_string(k)] = to_string(m.c(i, j, k));
    return out;
}

}  // namespace cmw
