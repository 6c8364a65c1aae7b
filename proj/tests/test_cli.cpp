#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <memory>

#include "cmw/config.hpp"
#include "cmw/grid_io.hpp"
#include "cmw/report.hpp"

using namespace cmw;
using nlohmann::json;

namespace {

RunConfig cfg_of(const json& doc) { return parse_config(doc); }

const json& find_entry(const json& arr, const std::string& key, const std::string& value) {
    for (const auto& e : arr)
        if (e.at(key) == value) return e;
    throw std::runtime_error("no entry " + value);
}

std::filesystem::path temp_base(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "cmw_test_cli";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

// --- configuration ---

TEST(Config, MinimalDeriveGetsExplicitDefaults) {
    const auto cfg = cfg_of({{"command", "derive"}, {"model", "round-s3"}});
    EXPECT_EQ(cfg.model.name(), "round-s3");
    ASSERT_TRUE(cfg.eps.has_value());
    EXPECT_EQ(*cfg.eps, Rational(1));
    const json j = config_to_json(cfg);
    for (const char* key : {"command", "model", "eps", "eps_list", "backend", "N", "seed", "constraint", "tolerances",
                            "output", "csv", "checkpoint", "init"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["backend"], "invariant");
    EXPECT_EQ(j["eps"], "1");
}

TEST(Config, DecreasingSweepListIsValid) {
    const auto cfg = cfg_of({{"command", "sweep"}, {"model", "heisenberg"}, {"eps_list", {"1/2", "1/4"}}});
    ASSERT_EQ(cfg.eps_list.size(), 2u);
    EXPECT_EQ(cfg.eps_list[1], Rational(1, 4));
    EXPECT_EQ(cfg.csv, "sweep.csv");
}

TEST(Config, IncreasingSweepListIsRejected) {
    try {
        cfg_of({{"command", "sweep"}, {"eps_list", {"1/4", "1/2"}}});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("eps_list"), std::string::npos);
    }
}

TEST(Config, FieldLevelGuards) {
    EXPECT_THROW(cfg_of({{"command", "solve"}, {"backend", "heis-grid"}, {"N", 7}}), ConfigError);
    EXPECT_THROW(cfg_of({{"command", "solve"}, {"backend", "heis-grid"}, {"model", "round-s3"}}), ConfigError);
    EXPECT_THROW(cfg_of({{"command", "solve"}, {"backend", "spectral"}}), ConfigError);
    EXPECT_THROW(cfg_of({{"command", "solve"}, {"eps", "-1/2"}}), ConfigError);
    EXPECT_THROW(cfg_of({{"command", "solve"}, {"eps", "one half"}}), ConfigError);
    EXPECT_THROW(cfg_of({{"command", "solve"}, {"model", "no-such-model"}}), ConfigError);
    EXPECT_THROW(cfg_of({{"command", "solve"}, {"colour", "red"}}), ConfigError);
    EXPECT_THROW(cfg_of({{"command", "explode"}}), ConfigError);
    EXPECT_THROW(cfg_of({{"model", "heisenberg"}}), ConfigError);
    EXPECT_THROW(cfg_of({{"command", "sweep"}}), ConfigError);
    EXPECT_THROW(cfg_of({{"command", "solve"}, {"tolerances", {{"solve", 0}}}}), ConfigError);
    EXPECT_THROW(cfg_of({{"command", "solve"}, {"checkpoint", "x"}}), ConfigError);
    EXPECT_THROW(cfg_of({{"command", "solve"}, {"seed", -1}}), ConfigError);
}

TEST(Config, InlineModelDocuments) {
    const auto a = cfg_of({{"command", "derive"}, {"model", {{"name", "mine"}, {"p", "1/2"}, {"q", "3"}}}});
    EXPECT_TRUE(a.model.same_structure(make_gen(Rational(1, 2), 3)));
    const auto b = cfg_of({{"command", "derive"}, {"model", {{"c_0_12", "2"}, {"c_1_02", "-2"}, {"c_2_01", "2"}}}});
    EXPECT_TRUE(b.model.same_structure(round_s3()));
}

TEST(Config, FlagsOverrideFileValues) {
    const json file = {{"command", "solve"}, {"model", "round-s3"}, {"seed", 4}, {"tolerances", {{"solve", 1e-9}}}};
    const json flags = {{"command", "solve"}, {"seed", 9}, {"tolerances", {{"phi", 1e-7}}}};
    const auto cfg = parse_config(merge_config(file, flags));
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.model.name(), "round-s3");
    EXPECT_EQ(cfg.tol.solve, 1e-9);
    EXPECT_EQ(cfg.tol.phi, 1e-7);
}

TEST(Config, EffectiveConfigRoundTrips) {
    const auto cfg = cfg_of({{"command", "sweep"}, {"eps_list", {"1/2", "1/4", "1/8"}}, {"seed", 3}, {"output", "r.json"}});
    EXPECT_EQ(cfg.csv, "r.csv");
    const json once = config_to_json(cfg);
    EXPECT_EQ(config_to_json(parse_config(once)), once);
}

// --- reports ---

TEST(Report, DeriveTorsionModel) {
    const auto out = run_command(cfg_of({{"command", "derive"}, {"model", "torsion"}}));
    EXPECT_EQ(out.exit_code, 0);
    EXPECT_EQ(out.report["A"], json::array({"0", "-2"}));
    EXPECT_EQ(out.report["W"], "0");
    EXPECT_EQ(out.report["omega"]["e0"], "0");
    EXPECT_TRUE(out.report["lemma42"].contains("gap"));
}

TEST(Report, DeriveRoundSphereScalarCurvature) {
    const auto out = run_command(cfg_of({{"command", "derive"}, {"model", "round-s3"}}));
    EXPECT_EQ(out.report["R_scalar"], "6");
    EXPECT_EQ(out.report["W"], "2");
    EXPECT_EQ(out.report["omega"]["e0"], "-2");
}

TEST(Report, CheckPassesOnCatalog) {
    for (const char* m : {"round-s3", "heisenberg", "torsion"}) {
        const auto out = run_command(cfg_of({{"command", "check"}, {"model", m}}));
        EXPECT_EQ(out.exit_code, 0) << m;
        EXPECT_TRUE(out.report["passed"].get<bool>()) << m;
        EXPECT_TRUE(find_entry(out.report["identities"], "name", "clifford axioms rho_eps")["passed"].get<bool>());
    }
}

TEST(Report, CurvatureRoundSphere) {
    const auto out = run_command(cfg_of({{"command", "curvature"}, {"model", "round-s3"}, {"eps", "1"}}));
    const auto& lc = find_entry(out.report["connections"], "flavor", "levi-civita");
    EXPECT_EQ(lc["F12"], "-1");
    EXPECT_EQ(lc["pi_xi_trace"], json::array({"0", "-1"}));
}

TEST(Report, SolveRoundSphereConstrainedIsConsistentWithTheorem) {
    const auto out = run_command(cfg_of({{"command", "solve"}, {"model", "round-s3"}, {"constraint", true}}));
    EXPECT_EQ(out.exit_code, 0);
    EXPECT_EQ(out.report["verdict"], "consistent-with-theorem");
    EXPECT_NEAR(out.report["state"]["a"][0].get<double>(), 1.0, 1e-8);
    for (const char* key : {"model", "eps", "seed", "iterations", "residuals", "energy_terms", "verdict"})
        EXPECT_TRUE(out.report.contains(key)) << key;
}

TEST(Report, SolveHeisenbergMatchesClosedForm) {
    const auto out = run_command(cfg_of({{"command", "solve"}, {"model", "heisenberg"}, {"seed", 5}}));
    EXPECT_EQ(out.exit_code, 0);
    EXPECT_LE(out.report["closed_form_gap"].get<double>(), 1e-10);
    EXPECT_EQ(out.report["verdict"], "rejected-precondition");
}

TEST(Report, NonConvergenceExitsTwo) {
    const auto out = run_command(
        cfg_of({{"command", "solve"}, {"model", "heisenberg"}, {"seed", 5}, {"tolerances", {{"max_iter", 1}}}}));
    EXPECT_EQ(out.exit_code, 2);
    EXPECT_FALSE(out.report["converged"].get<bool>());
}

TEST(Report, EmbedsConfigAndVersion) {
    const auto cfg = cfg_of({{"command", "solve"}, {"model", "round-s3"}, {"seed", 2}});
    const auto out = run_command(cfg);
    EXPECT_EQ(out.report["config"], config_to_json(cfg));
    EXPECT_EQ(out.report["artifact"]["version"], CMW_VERSION);
}

TEST(Report, RepeatedRunsAreByteIdentical) {
    for (const json& doc : {json{{"command", "solve"}, {"model", "heisenberg"}, {"seed", 11}},
                            json{{"command", "sweep"}, {"model", "heisenberg"}, {"eps_list", {"1/2", "1/4"}}, {"seed", 1}},
                            json{{"command", "derive"}, {"model", "torsion"}}}) {
        const auto a = run_command(parse_config(doc));
        const auto b = run_command(parse_config(doc));
        EXPECT_EQ(render_report(a.report), render_report(b.report));
        EXPECT_EQ(a.csv, b.csv);
    }
}

TEST(Report, SweepCsvColumnsAndRows) {
    const auto out = run_command(cfg_of({{"command", "sweep"}, {"model", "heisenberg"}, {"eps_list", {"1/2", "1/4", "1/8"}}}));
    const std::string header = out.csv.substr(0, out.csv.find('\n'));
    EXPECT_EQ(header, "eps,sup_phi_sq,norm_T_deriv_sq,norm_Xi_deriv_sq,cross_term,residual_limit");
    EXPECT_EQ(std::count(out.csv.begin(), out.csv.end(), '\n'), 4);
    EXPECT_EQ(out.report["records"].size(), 3u);
    EXPECT_EQ(out.report["records"][2]["eps"], "1/8");
    EXPECT_TRUE(out.report["sup_bound_holds"].get<bool>());
}

TEST(Report, SolveEpsSystemRejectsTorsion) {
    EXPECT_THROW(run_command(cfg_of({{"command", "solve"}, {"model", "torsion"}, {"eps", "1/2"}})), TorsionError);
}

// --- grid checkpoints ---

namespace {

MonopoleState<HeisGrid> labelled_state(int n) {
    auto grid = std::make_shared<const HeisGrid>(n);
    MonopoleState<HeisGrid> s{GaugeField<HeisGrid>::zero(grid), SpinorField<HeisGrid>::zero(grid), Rational(1, 4)};
    for (std::size_t k = 0; k < grid->sites(); ++k) {
        const double v = static_cast<double>(k);
        s.phi.alpha[k] = DComplex(v + 0.25, -v);
        s.phi.beta[k] = DComplex(1.0 / (v + 1), v * v);
        for (int d = 0; d < 3; ++d) s.a.comp[d][k] = (d + 1) * 1e-3 * v - 0.5;
    }
    return s;
}

}  // namespace

TEST(GridIo, RowMajorLittleEndianLayout) {
    const auto s = labelled_state(4);
    const std::string bytes = encode_grid_fields(s);
    ASSERT_EQ(bytes.size(), 5u * 64u * 16u);
    const std::size_t idx = s.backend().index(1, 2, 3);
    EXPECT_EQ(idx, (1u * 4u + 2u) * 4u + 3u);
    const std::size_t off = idx * 16;
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[off + b])) << (8 * b);
    EXPECT_EQ(std::bit_cast<double>(bits), s.phi.alpha[idx].re);
    // a1 block: fourth field, imaginary part zero
    const std::size_t a1_off = (3 * 64 + idx) * 16;
    bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[a1_off + b])) << (8 * b);
    EXPECT_EQ(std::bit_cast<double>(bits), s.a.comp[1][idx]);
    for (int b = 8; b < 16; ++b) EXPECT_EQ(bytes[a1_off + b], 0);
}

TEST(GridIo, SidecarFields) {
    const json j = grid_sidecar(labelled_state(4));
    EXPECT_EQ(j["N"], 4);
    EXPECT_EQ(j["model"], "heisenberg");
    EXPECT_EQ(j["field-names"], json::array({"alpha", "beta1bar", "a0", "a1", "a2"}));
    EXPECT_EQ(j["eps"], "1/4");
}

TEST(GridIo, FileRoundTripIsExact) {
    const auto s = labelled_state(6);
    const auto base = temp_base("roundtrip");
    write_grid_fields(base, s);
    const auto t = read_grid_fields(base);
    EXPECT_EQ(t.backend().n(), 6);
    ASSERT_TRUE(t.eps.has_value());
    EXPECT_EQ(*t.eps, Rational(1, 4));
    for (std::size_t k = 0; k < s.backend().sites(); ++k) {
        EXPECT_EQ(t.phi.alpha[k], s.phi.alpha[k]);
        EXPECT_EQ(t.phi.beta[k], s.phi.beta[k]);
        for (int d = 0; d < 3; ++d) EXPECT_EQ(t.a.comp[d][k], s.a.comp[d][k]);
    }
}

TEST(GridIo, RejectsMalformedInput) {
    const auto s = labelled_state(4);
    const json side = grid_sidecar(s);
    std::string bytes = encode_grid_fields(s);
    EXPECT_THROW(decode_grid_fields(side, bytes.substr(0, bytes.size() - 1)), ParseError);
    json wrong = side;
    wrong["field-names"] = json::array({"alpha"});
    EXPECT_THROW(decode_grid_fields(wrong, bytes), ParseError);
    bytes[3 * 64 * 16 + 8 + 7] = 0x3f;  // nonzero imaginary part in a1
    EXPECT_THROW(decode_grid_fields(side, bytes), ParseError);
}
