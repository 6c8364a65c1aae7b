#pragma once

// Command pipelines and report assembly. Reports are plain JSON objects with
// sorted keys; no clocks, paths other than the configured ones, or thread
// counts enter them, so equal (config, seed) gives byte-identical output.

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>

#include "cmw/catalog_json.hpp"
#include "cmw/clifford.hpp"
#include "cmw/config.hpp"
#include "cmw/fields.hpp"
#include "cmw/grid_io.hpp"
#include "cmw/monopole.hpp"
#include "cmw/pseudohermitian.hpp"

#ifndef CMW_VERSION
#define CMW_VERSION "0.0.0"
#endif

namespace cmw {

enum ExitCode : int { kExitOk = 0, kExitIdentityFailure = 1, kExitNotConverged = 2, kExitConfigError = 3 };

struct RunOutcome {
    int exit_code = kExitOk;
    nlohmann::json report;
    std::string csv;  // sweep only
};

namespace detail {

using json = nlohmann::json;

inline json rational_json(const Rational& r) { return to_string(r); }
inline json complex_json(const ExactComplex& z) { return json::array({to_string(z.re), to_string(z.im)}); }
inline json complex_json(const DComplex& z) { return json::array({z.re, z.im}); }
inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json one_form_json(const ExactForm& f) {
    json j;
    for (int k = 0; k < 3; ++k) j["e" + std::to_string(k)] = complex_json(f[1 << k]);
    return j;
}

inline json two_form_json(const ExactForm& f) {
    json j;
    for (const auto& [a, b] : kPairs) j["e" + std::to_string(a) + "^e" + std::to_string(b)] = complex_json(f[(1 << a) | (1 << b)]);
    return j;
}

inline json real_one_form_json(const ExactForm& f) {
    json j;
    for (int k = 0; k < 3; ++k) j["e" + std::to_string(k)] = to_string(f[1 << k].re);
    return j;
}

inline json residual_json(const ResidualReport& r) {
    return {{"r_dirac", r.r_dirac}, {"r_curv", r.r_curv}, {"r_constraint", r.r_constraint}, {"total", r.total}};
}

inline json energy_json(const std::optional<WeitzenbockTerms<double>>& e) {
    if (!e) return nullptr;
    return {{"grad_sq", e->grad_sq}, {"tw_term", e->tw_term}, {"curv_term", e->curv_term},
            {"reeb_term", e->reeb_term}, {"dirac_sq", e->dirac_sq}, {"rhs", e->rhs()}, {"gap", e->gap()}};
}

inline json identity(const std::string& name, bool passed, bool counted = true, json detail = nullptr) {
    json j{{"name", name}, {"passed", passed}, {"counted", counted}};
    if (!detail.is_null()) j["detail"] = std::move(detail);
    return j;
}

inline ExactForm sample_twist() {
    ExactForm a(1);
    a.set(1, ExactComplex(Rational(2)));
    a.set(2, ExactComplex(Rational(1)));
    a.set(4, ExactComplex(Rational(-1)));
    return a;
}

// --- derive ---

inline RunOutcome run_derive(const RunConfig& cfg) {
    const ModelStructure& m = cfg.model;
    const Rational eps = cfg.eps.value_or(Rational(1));
    const PhInvariants ph = derive_ph_invariants(m);
    const auto se = check_structure_equations(m, ph);
    const auto rd = riemannian_connection(m, eps);
    const auto rc = check_riemann_data(rd, m);
    const auto cm = commutator_check(m, ph);
    const auto cmp = curvature_comparison(m, eps);
    const auto fit = fit_curvature_constants(m);

    RunOutcome out;
    json& r = out.report;
    r["omega"] = real_one_form_json(ph.omega);
    r["A"] = complex_json(ph.torsion);
    r["W"] = to_string(ph.tw_curv.re);
    r["torsion_free"] = ph.torsion_free();
    r["R_scalar"] = to_string(rd.scalar.re);
    r["lemma42"] = {{"paper", to_string(cmp.closed_form_value)}, {"oracle", to_string(cmp.oracle_value)},
                    {"gap", to_string(cmp.gap)}};
    r["curvature_fit"] = {{"leading", to_string(fit.leading)},
                          {"c1", to_string(fit.c1)},
                          {"c2", fit.c2 ? json(to_string(*fit.c2)) : json(nullptr)},
                          {"poly_fits", fit.poly_fits},
                          {"leading_is_4W", fit.leading_is_4w}};
    json conn;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) conn["omega^" + std::to_string(i) + "_" + std::to_string(j)] = real_one_form_json(rd.omega(i, j));
    r["riemann_connection"] = conn;
    r["checks"] = json::array({identity("structure-equation first", se.first_equation),
                               identity("structure-equation curvature", se.curvature_equation),
                               identity("structure-equation complex basis", se.complex_curvature),
                               identity("connection form real", se.omega_real),
                               identity("riemann connection antisymmetric", rc.antisymmetric),
                               identity("riemann first structure equation", rc.first_structure_equation),
                               identity("commutator Z1 Z1bar", cm.holo_antiholo),
                               identity("commutator Z1bar T", cm.antiholo_reeb)});
    const bool ok = se.all() && rc.all() && cm.all();
    r["passed"] = ok;
    out.exit_code = ok ? kExitOk : kExitIdentityFailure;
    return out;
}

// --- check ---

inline json axiom_json(const CliffordAxiomReport& a) {
    json f = json::array();
    for (const auto& s : a.failures) f.push_back(s);
    return {{"failures", f}};
}

inline RunOutcome run_check(const RunConfig& cfg) {
    const ModelStructure& m = cfg.model;
    const Rational eps = cfg.eps.value_or(Rational(1));
    const PhInvariants ph = derive_ph_invariants(m);
    const ExactForm zero = ExactForm::zero(1);
    const ExactForm twist = sample_twist();

    json ids = json::array();
    const auto ga = clifford_axiom_check(gamma_can());
    ids.push_back(identity("clifford axioms gamma_can", ga.passed(), true, axiom_json(ga)));
    const auto ra = clifford_axiom_check(rho_eps(eps));
    ids.push_back(identity("clifford axioms rho_eps", ra.passed(), true, axiom_json(ra)));

    for (const auto* a : {&zero, &twist}) {
        const std::string suffix = a == &zero ? " (a = 0)" : " (a = 2e0 + e1 - e2)";
        const auto ph_cc = conn_coeffs(ph, eps, *a, ConnectionFlavor::Pseudohermitian);
        ids.push_back(identity("compatibility pseudohermitian" + suffix, pseudohermitian_compatible(ph_cc, ph)));
        const auto solved = conn_coeffs(ph, eps, *a, ConnectionFlavor::LeviCivitaSolved, &m);
        ids.push_back(identity("compatibility levi-civita solved lift" + suffix, levi_civita_compatible(solved, m)));
        ids.push_back(identity("half trace solved lift" + suffix, solved.trace_half == trace_connection(ph, eps, *a)));
        const auto verbatim = conn_coeffs(ph, eps, *a, ConnectionFlavor::LeviCivita);
        ids.push_back(identity("compatibility levi-civita tabulated coefficients" + suffix,
                               levi_civita_compatible(verbatim, m), false));
        ids.push_back(identity("half trace tabulated coefficients" + suffix,
                               verbatim.trace_half == trace_connection(ph, eps, *a)));
    }
    const auto verbatim0 = conn_coeffs(ph, eps, zero, ConnectionFlavor::LeviCivita);
    ids.push_back(identity("unitarity tabulated coefficients", base_is_skew_hermitian(verbatim0), false));
    ids.push_back(identity("unitarity solved lift",
                           base_is_skew_hermitian(conn_coeffs(ph, eps, zero, ConnectionFlavor::LeviCivitaSolved, &m))));
    if (ph.torsion_free()) {
        ids.push_back(identity("splitting block diagonal", base_block_diagonal(verbatim0)));
        const auto ci = clifford_identities(m, eps);
        ids.push_back(identity("clifford identities", ci.all()));
        ids.push_back(identity("dirac eigenvalue on Phi0 equals eps", ci.eigenvalue == lift_spinor(ExactComplex(eps))));
    }
    const auto se = check_structure_equations(m, ph);
    ids.push_back(identity("structure equations", se.all()));
    ids.push_back(identity("commutators", commutator_check(m, ph).all()));

    bool ok = true;
    for (const auto& i : ids)
        if (i["counted"].get<bool>() && !i["passed"].get<bool>()) ok = false;
    RunOutcome out;
    out.report["identities"] = ids;
    out.report["passed"] = ok;
    out.exit_code = ok ? kExitOk : kExitIdentityFailure;
    return out;
}

// --- curvature ---

inline json curvature_json(const ConnCoeffs& cc, const ModelStructure& m) {
    const auto t = curvature_trace(cc, m);
    return {{"flavor", to_string(cc.flavor)},
            {"trace_half", one_form_json(cc.trace_half)},
            {"F_b", two_form_json(t.f_b)},
            {"F12", to_string(t.f12)},
            {"F01", to_string(t.f01)},
            {"F02", to_string(t.f02)},
            {"F0", complex_json(t.f0)},
            {"pi_xi_trace", complex_json(t.pi_xi_trace)},
            {"pi_xi_twist", complex_json(t.pi_xi_twist)}};
}

inline RunOutcome run_curvature(const RunConfig& cfg) {
    const ModelStructure& m = cfg.model;
    const Rational eps = cfg.eps.value_or(Rational(1));
    const PhInvariants ph = derive_ph_invariants(m);
    const ExactForm zero = ExactForm::zero(1);
    RunOutcome out;
    out.report["connections"] = json::array({curvature_json(conn_coeffs(ph, eps, zero, ConnectionFlavor::Pseudohermitian), m),
                                             curvature_json(conn_coeffs(ph, eps, zero, ConnectionFlavor::LeviCivita), m),
                                             curvature_json(conn_coeffs(ph, eps, zero, ConnectionFlavor::LeviCivitaSolved, &m), m)});
    out.report["W"] = to_string(ph.tw_curv.re);
    return out;
}

// --- solve ---

template <class B>
json state_summary(const MonopoleState<B>& s) {
    json j;
    j["sup_phi_sq"] = to_double(sup_norm_sq(s.phi));
    j["l2_phi_sq"] = to_double(l2_norm_sq(s.phi));
    if (s.backend().sites() == 1) {
        j["a"] = json::array({s.a.comp[0][0], s.a.comp[1][0], s.a.comp[2][0]});
        j["alpha"] = complex_json(s.phi.alpha[0]);
        j["beta1bar"] = complex_json(s.phi.beta[0]);
    } else {
        double a0 = 0;
        for (double v : s.a.comp[0]) a0 += v;
        j["mean_a0"] = a0 / static_cast<double>(s.backend().sites());
    }
    return j;
}

template <class B>
RunOutcome solve_on(const RunConfig& cfg, MonopoleState<B> init) {
    const auto ph = derive_ph_invariants(cfg.model);
    const auto g = make_geometry<double>(cfg.model, ph);
    SolveOptions opts;
    opts.constraint = cfg.constraint;
    opts.tol = cfg.tol.solve;
    opts.max_iter = cfg.tol.max_iter;
    const auto res = solve(init, opts);

    RunOutcome out;
    json& r = out.report;
    r["model"] = cfg.model.name();
    r["eps"] = cfg.eps ? json(to_string(*cfg.eps)) : json(nullptr);
    r["seed"] = cfg.seed;
    r["iterations"] = res.iterations;
    r["converged"] = res.converged;
    r["residuals"] = residual_json(res.report);
    r["energy_terms"] = energy_json(res.report.energy_terms);
    r["objective_final"] = res.objective_history.empty() ? json(nullptr) : json(res.objective_history.back());
    r["state"] = state_summary(res.state);

    std::string verdict = "rejected-precondition", reason;
    if (cfg.eps) {
        reason = "the vanishing certificate applies to the eps-free contact system";
    } else if (!(g.tw > 0)) {
        reason = "Tanaka-Webster curvature is not positive";
    } else {
        const auto c = vanishing_certificate(res.state, g, cfg.tol.certificate, cfg.tol.phi);
        verdict = c.verdict;
        if (verdict == "rejected-precondition") reason = "residual above the certificate tolerance";
        r["certificate"] = {{"sup_phi", c.sup_phi}, {"reducible", c.reducible},
                            {"energy_balance", optional_json(c.energy_balance)}, {"residuals", residual_json(c.report)}};
    }
    r["verdict"] = verdict;
    r["verdict_reason"] = reason;

    if constexpr (std::is_same_v<B, InvariantBackend<double>>) {
        if (is_heisenberg(cfg.model) && !cfg.eps && res.converged)
            r["closed_form_gap"] = closed_form_gap(res.state, cfg.tol.phi);
    }
    if constexpr (std::is_same_v<B, HeisGrid>) {
        if (!cfg.checkpoint.empty()) {
            write_grid_fields(cfg.checkpoint, res.state);
            r["checkpoint"] = cfg.checkpoint;
        }
    }
    if (!res.converged) out.exit_code = kExitNotConverged;
    else if (verdict == "counterexample-candidate") out.exit_code = kExitIdentityFailure;
    return out;
}

inline RunOutcome run_solve(const RunConfig& cfg) {
    if (cfg.backend == "heis-grid") {
        if (!cfg.init.empty()) {
            auto s = read_grid_fields(cfg.init);
            if (s.backend().n() != cfg.N) throw ConfigError("field 'init': checkpoint grid size differs from N");
            s.eps = cfg.eps;
            return solve_on(cfg, std::move(s));
        }
        auto grid = std::make_shared<const HeisGrid>(cfg.N, cfg.model);
        return solve_on(cfg, random_state(grid, cfg.seed, cfg.eps));
    }
    auto inv = std::make_shared<const InvariantBackend<double>>(cfg.model);
    return solve_on(cfg, random_state(inv, cfg.seed, cfg.eps));
}

// --- sweep ---

inline std::string format_csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string sweep_csv(const SweepResult& s) {
    std::string out = "eps,sup_phi_sq,norm_T_deriv_sq,norm_Xi_deriv_sq,cross_term,residual_limit\n";
    for (const auto& r : s.records) {
        out += to_string(r.eps) + "," + format_csv_number(r.sup_phi_sq) + "," + format_csv_number(r.norm_T_deriv_sq) +
               "," + format_csv_number(r.norm_Xi_deriv_sq) + "," + format_csv_number(r.norm_alpha_beta_cross) + "," +
               format_csv_number(r.limit_residual) + "\n";
    }
    return out;
}

template <class B>
RunOutcome sweep_on(const RunConfig& cfg, std::shared_ptr<const B> backend) {
    SolveOptions opts;
    opts.constraint = cfg.constraint;
    opts.tol = cfg.tol.solve;
    opts.max_iter = cfg.tol.max_iter;
    const SweepResult s = sweep(backend, cfg.eps_list, cfg.seed, opts);

    RunOutcome out;
    json& r = out.report;
    r["model"] = cfg.model.name();
    r["seed"] = cfg.seed;
    json recs = json::array();
    bool all_converged = true, sup_ok = true;
    for (const auto& rec : s.records) {
        const double e = to_double(rec.eps);
        const bool within = rec.sup_phi_sq <= s.sup_tw_bound + e * e + cfg.tol.certificate;
        sup_ok = sup_ok && within;
        all_converged = all_converged && rec.converged;
        recs.push_back({{"eps", to_string(rec.eps)},
                        {"sup_phi_sq", rec.sup_phi_sq},
                        {"sup_bound", s.sup_tw_bound + e * e},
                        {"sup_bound_holds", within},
                        {"norm_T_deriv_sq", rec.norm_T_deriv_sq},
                        {"norm_Xi_deriv_sq", rec.norm_Xi_deriv_sq},
                        {"norm_alpha_beta_cross", rec.norm_alpha_beta_cross},
                        {"energy_balance_gap", rec.energy_balance_gap},
                        {"limit_residual", rec.limit_residual},
                        {"limit_constraint", rec.limit_constraint},
                        {"total", rec.total},
                        {"iterations", rec.iterations},
                        {"converged", rec.converged},
                        {"reducible", rec.reducible}});
    }
    r["records"] = recs;
    r["slope_T"] = optional_json(s.slope_T);
    r["slope_Xi"] = optional_json(s.slope_Xi);
    r["sup_tw_bound"] = s.sup_tw_bound;
    r["sup_bound_holds"] = sup_ok;
    r["error"] = s.error.empty() ? json(nullptr) : json(s.error);
    r["csv"] = cfg.csv;
    out.csv = sweep_csv(s);
    if (!s.error.empty() || !all_converged) out.exit_code = kExitNotConverged;
    return out;
}

inline RunOutcome run_sweep(const RunConfig& cfg) {
    if (cfg.backend == "heis-grid") return sweep_on(cfg, std::make_shared<const HeisGrid>(cfg.N, cfg.model));
    return sweep_on(cfg, std::make_shared<const InvariantBackend<double>>(cfg.model));
}

}  // namespace detail

inline RunOutcome run_command(const RunConfig& cfg) {
    RunOutcome out;
    if (cfg.command == "derive") out = detail::run_derive(cfg);
    else if (cfg.command == "check") out = detail::run_check(cfg);
    else if (cfg.command == "curvature") out = detail::run_curvature(cfg);
    else if (cfg.command == "solve") out = detail::run_solve(cfg);
    else if (cfg.command == "sweep") out = detail::run_sweep(cfg);
    else throw ConfigError("field 'command': unknown command '" + cfg.command + "'");
    out.report["command"] = cfg.command;
    out.report["config"] = config_to_json(cfg);
    out.report["model_structure"] = model_to_json(cfg.model);
    out.report["artifact"] = {{"name", "cmw"}, {"version", CMW_VERSION}};
    out.report["exit_code"] = out.exit_code;
    return out;
}

inline std::string render_report(const nlohmann::json& report) { return report.dump(2) + "\n"; }

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace cmw
