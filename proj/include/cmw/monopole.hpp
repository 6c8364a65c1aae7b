#pragma once

// Contact monopole system and the eps-family Seiberg-Witten system: residuals,
// energy identities, a damped Gauss-Newton solver, the adiabatic sweep and the
// vanishing certificate for positive Tanaka-Webster curvature.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cmw/fields.hpp"

namespace cmw {

template <class B>
using RealField = std::vector<typename B::real_type>;
template <class B>
using ComplexField = std::vector<typename B::complex_type>;

template <class B>
struct MonopoleState {
    GaugeField<B> a;
    SpinorField<B> phi;
    std::optional<Rational> eps;  // none: the eps-free contact system

    const B& backend() const { return *phi.backend; }
    const ModelStructure& model() const { return phi.backend->model(); }
};

template <class B>
void require_consistent(const MonopoleState<B>& s) {
    require_same_backend(s.phi, s.a);
    const std::size_t n = s.backend().sites();
    if (s.phi.alpha.size() != n || s.phi.beta.size() != n) throw BackendMismatch("spinor size does not match backend");
    for (const auto& c : s.a.comp)
        if (c.size() != n) throw BackendMismatch("gauge field size does not match backend");
}

template <class R>
struct WeitzenbockTerms {
    R grad_sq{};    // sum_j ||nabla_{e_j} Phi||^2
    R tw_term{};    // 2 int W |beta|^2
    R curv_term{};  // int da(e1,e2)(|alpha|^2 - |beta|^2)
    R reeb_term{};  // Re 2i int (alpha_{,0} conj(alpha) - beta_{,0} conj(beta))
    R dirac_sq{};   // ||D_xi Phi||^2, computed independently

    R rhs() const { return grad_sq + tw_term + curv_term + reeb_term; }
    R gap() const { return dirac_sq - rhs(); }
};

struct ResidualReport {
    double r_dirac = 0;
    double r_curv = 0;
    double r_constraint = 0;
    std::optional<WeitzenbockTerms<double>> energy_terms;
    double total = 0;
};

struct SystemOptions {
    bool constraint = false;  // include the Reeb-derivative condition as equations
    bool coulomb = false;     // include d*a = 0 rows (grid gauge slice)
};

template <class B>
struct ResidualFields {
    ComplexField<B> dirac0, dirac1;
    RealField<B> curv;
    ComplexField<B> curv_off;  // eps system only
    ComplexField<B> cons0, cons1;
    RealField<B> coulomb;
};

template <class B>
struct Tangent {
    std::array<RealField<B>, 3> a;
    ComplexField<B> alpha, beta;

    static Tangent zero(std::size_t n) {
        using R = typename B::real_type;
        using C = typename B::complex_type;
        return {{RealField<B>(n, R(0)), RealField<B>(n, R(0)), RealField<B>(n, R(0))}, ComplexField<B>(n, C(0)),
                ComplexField<B>(n, C(0))};
    }
};

namespace detail {

template <class R>
R numeric_eps(const std::optional<Rational>& eps) {
    return from_rational<R>(*eps);
}

template <class C>
typename std::vector<C> scaled(const std::vector<C>& v, const C& c) {
    std::vector<C> out(v.size());
    for (std::size_t s = 0; s < v.size(); ++s) out[s] = c * v[s];
    return out;
}

// sum of squares of a block (unweighted)
template <class R>
R block_sq(const std::vector<R>& v) {
    R s(0);
    for (const auto& x : v) s += x * x;
    return s;
}
template <class R>
R block_sq(const std::vector<Complex<R>>& v) {
    R s(0);
    for (const auto& x : v) s += x.norm2();
    return s;
}

// linearized covariant derivative along frame vector j
template <class B>
SpinorField<B> lin_cov(int j, const MonopoleState<B>& s, const Tangent<B>& t, const Geometry<typename B::real_type>& g) {
    using C = typename B::complex_type;
    SpinorField<B> dt{s.phi.backend, t.alpha, t.beta};
    auto out = cov_deriv_frame(dt, j, s.a, g);
    const C i = C::I();
    for (std::size_t k = 0; k < out.alpha.size(); ++k) {
        out.alpha[k] += i * C(t.a[j][k]) * s.phi.alpha[k];
        out.beta[k] += i * C(t.a[j][k]) * s.phi.beta[k];
    }
    return out;
}

// adjoint of lin_cov for frame vector j, accumulated into t
template <class B>
void adj_cov(int j, const MonopoleState<B>& s, const SpinorField<B>& w, const Geometry<typename B::real_type>& g,
             Tangent<B>& t) {
    using C = typename B::complex_type;
    const auto back = cov_deriv_frame(w, j, s.a, g);
    for (std::size_t k = 0; k < back.alpha.size(); ++k) {
        t.alpha[k] -= back.alpha[k];
        t.beta[k] -= back.beta[k];
        const C z = s.phi.alpha[k] * w.alpha[k].conj() + s.phi.beta[k] * w.beta[k].conj();
        t.a[j][k] -= z.im;
    }
}

template <class B>
struct DirCoeffs {
    std::array<typename B::complex_type, 3> c;
};

template <class B>
DirCoeffs<B> dir_coeffs(Direction d) {
    using C = typename B::complex_type;
    using R = typename B::real_type;
    const R half = R(1) / R(2);
    switch (d) {
        case Direction::T:
            return {{C(1), C(0), C(0)}};
        case Direction::Z1:
            return {{C(0), C(half), C(R(0), -half)}};
        default:
            return {{C(0), C(half), C(R(0), half)}};
    }
}

template <class B>
SpinorField<B> lin_dir(Direction d, const MonopoleState<B>& s, const Tangent<B>& t,
                       const Geometry<typename B::real_type>& g) {
    using C = typename B::complex_type;
    const auto cf = dir_coeffs<B>(d);
    SpinorField<B> out = SpinorField<B>::zero(s.phi.backend);
    for (int j = 0; j < 3; ++j) {
        if (is_zero(cf.c[j])) continue;
        out = combine(C(1), out, cf.c[j], lin_cov(j, s, t, g));
    }
    return out;
}

template <class B>
void adj_dir(Direction d, const MonopoleState<B>& s, const SpinorField<B>& w, const Geometry<typename B::real_type>& g,
             Tangent<B>& t) {
    using C = typename B::complex_type;
    const auto cf = dir_coeffs<B>(d);
    for (int j = 0; j < 3; ++j) {
        if (is_zero(cf.c[j])) continue;
        adj_cov(j, s, combine(cf.c[j].conj(), w, C(0), w), g, t);
    }
}

template <class B>
RealField<B> lin_gauge_curv(const Tangent<B>& t, int j, int k, const MonopoleState<B>& s,
                            const Geometry<typename B::real_type>& g) {
    GaugeField<B> da{s.phi.backend, t.a};
    return gauge_curvature(da, j, k, g);
}

template <class B>
void adj_gauge_curv(const RealField<B>& u, int j, int k, const MonopoleState<B>& s,
                    const Geometry<typename B::real_type>& g, Tangent<B>& t) {
    const B& b = s.backend();
    const auto dj = b.frame_deriv(j, u);
    const auto dk = b.frame_deriv(k, u);
    for (std::size_t x = 0; x < u.size(); ++x) {
        t.a[k][x] -= dj[x];
        t.a[j][x] += dk[x];
        for (int i = 0; i < 3; ++i) t.a[i][x] += g.structure(i, j, k) * u[x];
    }
}

template <class B>
SpinorField<B> spinor_of(const MonopoleState<B>& s, ComplexField<B> alpha, ComplexField<B> beta) {
    return SpinorField<B>{s.phi.backend, std::move(alpha), std::move(beta)};
}

}  // namespace detail

// --- residual assembly ---

template <class B>
ResidualFields<B> eval_residual(const MonopoleState<B>& s, const Geometry<typename B::real_type>& g,
                                const SystemOptions& opts = {}) {
    using R = typename B::real_type;
    using C = typename B::complex_type;
    require_consistent(s);
    ResidualFields<B> r;
    const std::size_t n = s.backend().sites();
    if (!s.eps) {
        const auto d = dirac_xi(s.phi, s.a, g);
        r.dirac0 = d.alpha;
        r.dirac1 = d.beta;
        r.curv = gauge_curvature(s.a, 1, 2, g);
        for (std::size_t k = 0; k < n; ++k)
            r.curv[k] = r.curv[k] - g.tw - s.phi.alpha[k].norm2() + s.phi.beta[k].norm2();
    } else {
        const R eps = detail::numeric_eps<R>(s.eps);
        const auto d = dirac_eps(s.phi, s.a, g, eps);
        r.dirac0 = d.alpha;
        r.dirac1 = d.beta;
        r.curv = trace_curvature(s.a, 1, 2, g, eps);
        const auto f01 = trace_curvature(s.a, 0, 1, g, eps);
        const auto f02 = trace_curvature(s.a, 0, 2, g, eps);
        r.curv_off.resize(n);
        const R half = R(1) / R(2);
        for (std::size_t k = 0; k < n; ++k) {
            r.curv[k] = r.curv[k] - half * (s.phi.alpha[k].norm2() - s.phi.beta[k].norm2());
            r.curv_off[k] = C(f01[k] / eps, f02[k] / eps) - s.phi.alpha[k].conj() * s.phi.beta[k];
        }
    }
    if (opts.constraint) {
        const auto c = cov_deriv(s.phi, Direction::T, s.a, g);
        r.cons0 = c.alpha;
        r.cons1 = c.beta;
    }
    if (opts.coulomb) {
        r.coulomb.assign(n, R(0));
        for (int j = 0; j < 3; ++j) {
            const auto dj = s.backend().frame_deriv(j, s.a.comp[j]);
            for (std::size_t k = 0; k < n; ++k) r.coulomb[k] += dj[k];
        }
    }
    return r;
}

template <class B>
ResidualFields<B> lin_residual(const MonopoleState<B>& s, const Geometry<typename B::real_type>& g,
                               const SystemOptions& opts, const Tangent<B>& t) {
    using R = typename B::real_type;
    using C = typename B::complex_type;
    ResidualFields<B> r;
    const std::size_t n = s.backend().sites();
    const auto z1 = detail::lin_dir(Direction::Z1, s, t, g);
    const auto z1b = detail::lin_dir(Direction::Z1bar, s, t, g);
    const auto gc12 = detail::lin_gauge_curv(t, 1, 2, s, g);
    r.dirac0.resize(n);
    r.dirac1.resize(n);
    r.curv.resize(n);
    if (!s.eps) {
        for (std::size_t k = 0; k < n; ++k) {
            r.dirac0[k] = C(-2) * z1.beta[k];
            r.dirac1[k] = C(2) * z1b.alpha[k];
            r.curv[k] = gc12[k] - R(2) * (s.phi.alpha[k].conj() * t.alpha[k]).re +
                        R(2) * (s.phi.beta[k].conj() * t.beta[k]).re;
        }
    } else {
        const R eps = detail::numeric_eps<R>(s.eps);
        const auto d0 = detail::lin_dir(Direction::T, s, t, g);
        const C i_over_eps(R(0), R(1) / eps);
        const auto gc01 = detail::lin_gauge_curv(t, 0, 1, s, g);
        const auto gc02 = detail::lin_gauge_curv(t, 0, 2, s, g);
        r.curv_off.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            r.dirac0[k] = C(2) * z1.beta[k] - i_over_eps * d0.alpha[k] + C(eps) * t.alpha[k];
            r.dirac1[k] = i_over_eps * d0.beta[k] - C(2) * z1b.alpha[k];
            r.curv[k] = gc12[k] - (s.phi.alpha[k].conj() * t.alpha[k]).re + (s.phi.beta[k].conj() * t.beta[k]).re;
            r.curv_off[k] = C(gc01[k] / eps, gc02[k] / eps) - t.alpha[k].conj() * s.phi.beta[k] -
                            s.phi.alpha[k].conj() * t.beta[k];
        }
    }
    if (opts.constraint) {
        const auto c = detail::lin_dir(Direction::T, s, t, g);
        r.cons0 = c.alpha;
        r.cons1 = c.beta;
    }
    if (opts.coulomb) {
        r.coulomb.assign(n, R(0));
        for (int j = 0; j < 3; ++j) {
            const auto dj = s.backend().frame_deriv(j, t.a[j]);
            for (std::size_t k = 0; k < n; ++k) r.coulomb[k] += dj[k];
        }
    }
    return r;
}

// Adjoint of lin_residual under the real inner product Re sum u conj(v).
template <class B>
Tangent<B> adj_residual(const MonopoleState<B>& s, const Geometry<typename B::real_type>& g,
                        const SystemOptions& opts, const ResidualFields<B>& w) {
    using R = typename B::real_type;
    using C = typename B::complex_type;
    const std::size_t n = s.backend().sites();
    Tangent<B> t = Tangent<B>::zero(n);
    const ComplexField<B> zero(n, C(0));
    if (!s.eps) {
        detail::adj_dir(Direction::Z1, s, detail::spinor_of(s, zero, detail::scaled(w.dirac0, C(-2))), g, t);
        detail::adj_dir(Direction::Z1bar, s, detail::spinor_of(s, detail::scaled(w.dirac1, C(2)), zero), g, t);
        detail::adj_gauge_curv(w.curv, 1, 2, s, g, t);
        for (std::size_t k = 0; k < n; ++k) {
            t.alpha[k] -= C(R(2) * w.curv[k]) * s.phi.alpha[k];
            t.beta[k] += C(R(2) * w.curv[k]) * s.phi.beta[k];
        }
    } else {
        const R eps = detail::numeric_eps<R>(s.eps);
        const C i_over_eps(R(0), R(1) / eps);
        detail::adj_dir(Direction::Z1, s, detail::spinor_of(s, zero, detail::scaled(w.dirac0, C(2))), g, t);
        detail::adj_dir(Direction::T, s,
                        detail::spinor_of(s, detail::scaled(w.dirac0, i_over_eps),
                                          detail::scaled(w.dirac1, C(R(0)) - i_over_eps)),
                        g, t);
        detail::adj_dir(Direction::Z1bar, s, detail::spinor_of(s, detail::scaled(w.dirac1, C(-2)), zero), g, t);
        detail::adj_gauge_curv(w.curv, 1, 2, s, g, t);
        RealField<B> re(n), im(n);
        for (std::size_t k = 0; k < n; ++k) {
            re[k] = w.curv_off[k].re / eps;
            im[k] = w.curv_off[k].im / eps;
        }
        detail::adj_gauge_curv(re, 0, 1, s, g, t);
        detail::adj_gauge_curv(im, 0, 2, s, g, t);
        for (std::size_t k = 0; k < n; ++k) {
            t.alpha[k] += C(eps) * w.dirac0[k];
            t.alpha[k] -= C(w.curv[k]) * s.phi.alpha[k];
            t.beta[k] += C(w.curv[k]) * s.phi.beta[k];
            t.alpha[k] -= s.phi.beta[k] * w.curv_off[k].conj();
            t.beta[k] -= s.phi.alpha[k] * w.curv_off[k];
        }
    }
    if (opts.constraint) detail::adj_dir(Direction::T, s, detail::spinor_of(s, w.cons0, w.cons1), g, t);
    if (opts.coulomb) {
        for (int j = 0; j < 3; ++j) {
            const auto dj = s.backend().frame_deriv(j, w.coulomb);
            for (std::size_t k = 0; k < n; ++k) t.a[j][k] -= dj[k];
        }
    }
    return t;
}

// --- reports ---

template <class B>
WeitzenbockTerms<typename B::real_type> weitzenbock_energy(const MonopoleState<B>& s,
                                                           const Geometry<typename B::real_type>& g) {
    using R = typename B::real_type;
    using C = typename B::complex_type;
    if (s.eps) throw std::invalid_argument("the Weitzenbock decomposition applies to the eps-free system");
    require_consistent(s);
    WeitzenbockTerms<R> w;
    const B& b = s.backend();
    w.grad_sq = l2_norm_sq(cov_deriv_frame(s.phi, 1, s.a, g)) + l2_norm_sq(cov_deriv_frame(s.phi, 2, s.a, g));
    RealField<B> beta_sq(b.sites()), curv_density(b.sites());
    const auto da12 = gauge_curvature(s.a, 1, 2, g);
    for (std::size_t k = 0; k < b.sites(); ++k) {
        beta_sq[k] = s.phi.beta[k].norm2();
        curv_density[k] = da12[k] * (s.phi.alpha[k].norm2() - beta_sq[k]);
    }
    w.tw_term = R(2) * g.tw * integrate(b, beta_sq);
    w.curv_term = integrate(b, curv_density);
    const auto d0 = cov_deriv(s.phi, Direction::T, s.a, g);
    ComplexField<B> reeb(b.sites());
    for (std::size_t k = 0; k < b.sites(); ++k)
        reeb[k] = d0.alpha[k] * s.phi.alpha[k].conj() - d0.beta[k] * s.phi.beta[k].conj();
    w.reeb_term = (C(R(0), R(2)) * integrate(b, reeb)).re;
    w.dirac_sq = l2_norm_sq(dirac_xi(s.phi, s.a, g));
    return w;
}

template <class B>
ResidualReport make_report(const MonopoleState<B>& s, const Geometry<typename B::real_type>& g,
                           const ResidualFields<B>& r) {
    using R = typename B::real_type;
    const R w = s.backend().site_weight();
    ResidualReport rep;
    rep.r_dirac = std::sqrt(to_double(w * (detail::block_sq(r.dirac0) + detail::block_sq(r.dirac1))));
    rep.r_curv = std::sqrt(to_double(w * (detail::block_sq(r.curv) + detail::block_sq(r.curv_off))));
    if (r.cons0.empty()) {
        const auto c = cov_deriv(s.phi, Direction::T, s.a, g);
        rep.r_constraint = std::sqrt(to_double(l2_norm_sq(c)));
    } else {
        rep.r_constraint = std::sqrt(to_double(w * (detail::block_sq(r.cons0) + detail::block_sq(r.cons1))));
    }
    rep.total = std::sqrt(rep.r_dirac * rep.r_dirac + rep.r_curv * rep.r_curv);
    if (!s.eps) {
        const auto e = weitzenbock_energy(s, g);
        rep.energy_terms = WeitzenbockTerms<double>{to_double(e.grad_sq), to_double(e.tw_term), to_double(e.curv_term),
                                                    to_double(e.reeb_term), to_double(e.dirac_sq)};
    }
    return rep;
}

template <class B>
ResidualReport contact_residual(const MonopoleState<B>& s, const Geometry<typename B::real_type>& g) {
    if (s.eps) throw std::invalid_argument("residual of the contact system needs an eps-free state");
    return make_report(s, g, eval_residual(s, g));
}

template <class B>
ResidualReport residual_sw(const MonopoleState<B>& s, const Geometry<typename B::real_type>& g) {
    if (!s.eps) throw std::invalid_argument("residual of the eps system needs eps");
    return make_report(s, g, eval_residual(s, g));
}

template <class B>
ResidualReport residual(const MonopoleState<B>& s, const Geometry<typename B::real_type>& g) {
    return make_report(s, g, eval_residual(s, g));
}

// Sum of the three nonnegative terms left when the contact system and the Reeb condition hold.
template <class B>
typename B::real_type energy_identity(const MonopoleState<B>& s, const Geometry<typename B::real_type>& g,
                                          double tol) {
    using R = typename B::real_type;
    const auto rep = contact_residual(s, g);
    if (rep.total > tol || rep.r_constraint > tol)
        throw NotASolution("state violates the contact system or the Reeb condition (total " +
                           std::to_string(rep.total) + ", constraint " + std::to_string(rep.r_constraint) + ")");
    const B& b = s.backend();
    const R grad = l2_norm_sq(cov_deriv_frame(s.phi, 1, s.a, g)) + l2_norm_sq(cov_deriv_frame(s.phi, 2, s.a, g));
    RealField<B> tw(b.sites()), quartic(b.sites());
    for (std::size_t k = 0; k < b.sites(); ++k) {
        const R aa = s.phi.alpha[k].norm2(), bb = s.phi.beta[k].norm2();
        tw[k] = g.tw * (aa + bb);
        quartic[k] = (aa - bb) * (aa - bb);
    }
    return grad + integrate(b, tw) + integrate(b, quartic);
}

// --- solver ---

struct SolveOptions {
    bool constraint = false;
    double tol = 1e-10;
    int max_iter = 200;
    int cg_max = 500;
    double cg_rel_tol = 1e-12;
};

template <class B>
struct SolveResult {
    MonopoleState<B> state;
    ResidualReport report;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_history;  // total^2 (plus constraint rows) after each accepted step
};

namespace detail {

template <class B>
std::size_t tangent_size(const B& b) {
    return 7 * b.sites();
}

template <class B>
Eigen::VectorXd pack(const Tangent<B>& t) {
    const std::size_t n = t.alpha.size();
    Eigen::VectorXd v(7 * n);
    for (std::size_t k = 0; k < n; ++k) {
        for (int j = 0; j < 3; ++j) v[j * n + k] = t.a[j][k];
        v[3 * n + k] = t.alpha[k].re;
        v[4 * n + k] = t.alpha[k].im;
        v[5 * n + k] = t.beta[k].re;
        v[6 * n + k] = t.beta[k].im;
    }
    return v;
}

template <class B>
Tangent<B> unpack(const Eigen::VectorXd& v, std::size_t n) {
    Tangent<B> t = Tangent<B>::zero(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (int j = 0; j < 3; ++j) t.a[j][k] = v[j * n + k];
        t.alpha[k] = {v[3 * n + k], v[4 * n + k]};
        t.beta[k] = {v[5 * n + k], v[6 * n + k]};
    }
    return t;
}

template <class B>
Eigen::VectorXd pack_residual(const ResidualFields<B>& r) {
    std::vector<double> out;
    auto add_c = [&](const ComplexField<B>& f) {
        for (const auto& z : f) {
            out.push_back(z.re);
            out.push_back(z.im);
        }
    };
    add_c(r.dirac0);
    add_c(r.dirac1);
    out.insert(out.end(), r.curv.begin(), r.curv.end());
    add_c(r.curv_off);
    add_c(r.cons0);
    add_c(r.cons1);
    out.insert(out.end(), r.coulomb.begin(), r.coulomb.end());
    return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

template <class B>
ResidualFields<B> unpack_residual(const Eigen::VectorXd& v, const ResidualFields<B>& shape) {
    ResidualFields<B> r = shape;
    Eigen::Index p = 0;
    auto take_c = [&](ComplexField<B>& f) {
        for (auto& z : f) {
            z = {v[p], v[p + 1]};
            p += 2;
        }
    };
    take_c(r.dirac0);
    take_c(r.dirac1);
    for (auto& x : r.curv) x = v[p++];
    take_c(r.curv_off);
    take_c(r.cons0);
    take_c(r.cons1);
    for (auto& x : r.coulomb) x = v[p++];
    return r;
}

template <class B>
MonopoleState<B> step(const MonopoleState<B>& s, const Tangent<B>& t) {
    MonopoleState<B> out = s;
    for (std::size_t k = 0; k < t.alpha.size(); ++k) {
        for (int j = 0; j < 3; ++j) out.a.comp[j][k] += t.a[j][k];
        out.phi.alpha[k] += t.alpha[k];
        out.phi.beta[k] += t.beta[k];
    }
    return out;
}

// Global phase rotation is an exact symmetry: make alpha (or beta if alpha vanishes) real and
// nonnegative at the base site.
template <class B>
void fix_phase(MonopoleState<B>& s) {
    const double scale = std::sqrt(sup_norm_sq(s.phi));
    if (scale == 0.0) return;
    const bool use_alpha = std::sqrt(s.phi.alpha[0].norm2()) > 1e-14 * scale;
    const DComplex ref = use_alpha ? s.phi.alpha[0] : s.phi.beta[0];
    const double mag = std::sqrt(ref.norm2());
    if (mag <= 1e-14 * scale) return;
    const DComplex u = ref.conj() / DComplex(mag);
    for (std::size_t k = 0; k < s.phi.alpha.size(); ++k) {
        s.phi.alpha[k] = u * s.phi.alpha[k];
        s.phi.beta[k] = u * s.phi.beta[k];
    }
    (use_alpha ? s.phi.alpha[0] : s.phi.beta[0]) = DComplex(mag);
}

// Solve (J^T J + lambda) x = rhs matrix-free.
template <class B>
Eigen::VectorXd damped_normal_solve(const MonopoleState<B>& s, const Geometry<double>& g, const SystemOptions& sys,
                                    const ResidualFields<B>& shape, const Eigen::VectorXd& rhs, double lambda,
                                    const SolveOptions& opts) {
    const std::size_t n = s.backend().sites();
    auto apply = [&](const Eigen::VectorXd& x) {
        const auto jx = lin_residual(s, g, sys, unpack<B>(x, n));
        const auto packed = pack_residual(jx);
        const auto back = adj_residual(s, g, sys, unpack_residual(packed, shape));
        return Eigen::VectorXd(pack(back) + lambda * x);
    };
    if (n == 1) {
        const Eigen::Index m = rhs.size();
        Eigen::MatrixXd a(m, m);
        for (Eigen::Index c = 0; c < m; ++c) a.col(c) = apply(Eigen::VectorXd::Unit(m, c));
        return a.ldlt().solve(rhs);
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    Eigen::VectorXd r = rhs;
    Eigen::VectorXd p = r;
    double rr = r.squaredNorm();
    const double stop = opts.cg_rel_tol * opts.cg_rel_tol * rr;
    for (int it = 0; it < opts.cg_max && rr > stop; ++it) {
        const Eigen::VectorXd ap = apply(p);
        const double alpha = rr / p.dot(ap);
        x += alpha * p;
        r -= alpha * ap;
        const double rr_new = r.squaredNorm();
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    return x;
}

}  // namespace detail

template <class B>
SystemOptions system_options(const MonopoleState<B>& s, const SolveOptions& opts) {
    return SystemOptions{opts.constraint, s.backend().sites() > 1};
}

// Damped Gauss-Newton (Levenberg-Marquardt) with backtracking on the damping.
template <class B>
SolveResult<B> solve(MonopoleState<B> init, const SolveOptions& opts = {}) {
    static_assert(std::is_same_v<typename B::real_type, double>, "the solver works in double precision");
    require_consistent(init);
    const auto& model = init.model();
    const auto ph = derive_ph_invariants(model);
    if (init.eps && !ph.torsion_free()) throw TorsionError("the eps system needs vanishing torsion");
    const auto g = make_geometry<double>(model, ph);
    const SystemOptions sys = system_options(init, opts);
    const double w = init.backend().site_weight();

    SolveResult<B> out;
    MonopoleState<B> x = std::move(init);
    detail::fix_phase(x);
    auto r = eval_residual(x, g, sys);
    Eigen::VectorXd rv = detail::pack_residual(r);
    double f = rv.squaredNorm();
    double lambda = 1e-4;
    auto objective_ok = [&](double val) { return std::sqrt(w * val) <= opts.tol; };

    int it = 0;
    for (; it < opts.max_iter && !objective_ok(f); ++it) {
        const Eigen::VectorXd g_vec = detail::pack(adj_residual(x, g, sys, r));
        bool accepted = false;
        for (int tries = 0; tries < 40; ++tries) {
            const Eigen::VectorXd delta = detail::damped_normal_solve(x, g, sys, r, Eigen::VectorXd(-g_vec), lambda, opts);
            auto trial = detail::step(x, detail::unpack<B>(delta, x.backend().sites()));
            detail::fix_phase(trial);
            auto r_trial = eval_residual(trial, g, sys);
            const Eigen::VectorXd rv_trial = detail::pack_residual(r_trial);
            const double f_trial = rv_trial.squaredNorm();
            if (f_trial < f) {
                x = std::move(trial);
                r = std::move(r_trial);
                f = f_trial;
                lambda = std::max(lambda / 5.0, 1e-15);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) break;
        out.objective_history.push_back(w * f);
    }
    out.iterations = it;
    out.converged = objective_ok(f);
    out.report = make_report(x, g, eval_residual(x, g));
    out.state = std::move(x);
    return out;
}

// --- seeded initial states ---

template <class B>
MonopoleState<B> random_state(std::shared_ptr<const B> b, std::uint64_t seed, std::optional<Rational> eps,
                              double amplitude = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    MonopoleState<B> s{GaugeField<B>::zero(b), SpinorField<B>::zero(b), std::move(eps)};
    if constexpr (std::is_same_v<B, HeisGrid>) {
        // low-order z-independent trigonometric polynomials
        struct Mode {
            int mx, my;
            double c, d;
        };
        auto modes = [&] {
            std::vector<Mode> m;
            for (int mx = -1; mx <= 1; ++mx)
                for (int my = -1; my <= 1; ++my) m.push_back({mx, my, u(rng), u(rng)});
            return m;
        };
        for (int j = 0; j < 3; ++j) {
            const auto m = modes();
            s.a.comp[j] = b->sample([&](double x, double y, double) {
                double v = 0;
                for (const auto& md : m) v += md.c * std::cos(2 * M_PI * (md.mx * x + md.my * y)) / 9.0;
                return v;
            });
        }
        const auto ma = modes(), mb = modes();
        auto field = [&](const std::vector<Mode>& m) {
            return b->sample([&](double x, double y, double) {
                DComplex v(0);
                for (const auto& md : m) {
                    const double ph = 2 * M_PI * (md.mx * x + md.my * y);
                    v += DComplex(md.c, md.d) * DComplex(std::cos(ph), std::sin(ph)) / DComplex(9.0);
                }
                return v;
            });
        };
        s.phi.alpha = field(ma);
        s.phi.beta = field(mb);
    } else {
        for (int j = 0; j < 3; ++j) s.a.comp[j][0] = u(rng);
        s.phi.alpha[0] = {u(rng), u(rng)};
        s.phi.beta[0] = {u(rng), u(rng)};
    }
    return s;
}

// --- exact invariant-sector solution families on the Heisenberg model ---

struct InvariantFamilyPoint {
    Rational a0;
    bool horizontal_free = false;  // a1, a2 arbitrary (only when Phi = 0)
    Rational a1, a2;
};

inline InvariantFamilyPoint invariant_closed_form(const ModelStructure& m, const ExactComplex& alpha,
                                                  const ExactComplex& beta) {
    if (!is_heisenberg(m)) throw WrongModel("closed-form solution family is for the heisenberg model, got '" + m.name() + "'");
    InvariantFamilyPoint p;
    p.a0 = (alpha.norm2() - beta.norm2()) / 2;
    p.horizontal_free = is_zero(alpha) && is_zero(beta);
    p.a1 = 0;
    p.a2 = 0;
    return p;
}

// Distance of a numerical invariant state from the exact family; spinors with
// sup |Phi| <= reducible_tol are labeled reducible and compared with Phi = 0.
inline double closed_form_gap(const MonopoleState<InvariantBackend<double>>& s, double reducible_tol = 1e-8) {
    const bool reducible = std::sqrt(sup_norm_sq(s.phi)) <= reducible_tol;
    auto exact_of = [&](const DComplex& z) {
        return reducible ? ExactComplex(0) : ExactComplex(Rational(z.re), Rational(z.im));
    };
    const auto p = invariant_closed_form(s.model(), exact_of(s.phi.alpha[0]), exact_of(s.phi.beta[0]));
    double gap = std::abs(s.a.comp[0][0] - to_double(p.a0));
    if (!p.horizontal_free) gap = std::max({gap, std::abs(s.a.comp[1][0]), std::abs(s.a.comp[2][0])});
    return gap;
}

// Invariant solutions of the eps system on the Heisenberg model.
struct EpsFamilyPoint {
    Rational a0;
    Rational alpha_sq;  // |alpha|^2, beta = 0
};

inline EpsFamilyPoint eps_reducible_solution(const Rational& eps) { return {-eps / 2, Rational(0)}; }

inline std::optional<EpsFamilyPoint> eps_nontrivial_solution(const Rational& eps) {
    const Rational alpha_sq = 2 * eps - 4 * eps * eps;
    if (alpha_sq < 0) return std::nullopt;
    return EpsFamilyPoint{-eps * eps, alpha_sq};
}

// --- vanishing certificate ---

struct Certificate {
    std::string verdict;  // consistent-with-theorem | counterexample-candidate | rejected-precondition
    ResidualReport report;
    std::optional<double> energy_balance;
    double sup_phi = 0;
    bool reducible = false;
};

template <class B>
Certificate vanishing_certificate(const MonopoleState<B>& s, const Geometry<double>& g, double tol = 1e-8,
                                 double phi_tol = 1e-8) {
    if (!(g.tw > 0)) throw PreconditionError("vanishing certificate needs positive Tanaka-Webster curvature");
    Certificate c;
    c.report = contact_residual(s, g);
    c.sup_phi = std::sqrt(to_double(sup_norm_sq(s.phi)));
    c.reducible = c.sup_phi <= phi_tol;
    if (c.report.total > tol || c.report.r_constraint > tol) {
        c.verdict = "rejected-precondition";
        return c;
    }
    c.energy_balance = to_double(energy_identity(s, g, tol));
    c.verdict = c.sup_phi <= phi_tol ? "consistent-with-theorem" : "counterexample-candidate";
    return c;
}

// --- adiabatic sweep ---

struct SweepRecord {
    Rational eps;
    double sup_phi_sq = 0;
    double norm_T_deriv_sq = 0;
    double norm_Xi_deriv_sq = 0;
    double norm_alpha_beta_cross = 0;    // 2 ||alpha beta||^2
    double energy_balance_gap = 0;         // eps^2||alpha||^2 - (eps^-2||T||^2 + ||Xi||^2 + cross)
    double limit_residual = 0;
    double limit_constraint = 0;
    double total = 0;
    int iterations = 0;
    bool converged = false;
    bool reducible = false;  // sup |Phi| <= 1e-8: excluded from slope fits
};

struct SweepResult {
    std::vector<SweepRecord> records;
    std::optional<double> slope_T;
    std::optional<double> slope_Xi;
    double sup_tw_bound = 0;  // sup(-4W)
    std::string error;        // set if a solve threw; records hold the partial sweep
};

// least-squares slope of log(values) against log(eps); none if fewer than two points or a value is not positive
inline std::optional<double> loglog_slope(const std::vector<double>& eps, const std::vector<double>& values) {
    if (eps.size() < 2 || eps.size() != values.size()) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(values[i] > 0) || !std::isfinite(values[i])) return std::nullopt;
        const double x = std::log(eps[i]), y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0) return std::nullopt;
    return (n * sxy - sx * sy) / den;
}

template <class B>
SweepRecord sweep_diagnostics(const MonopoleState<B>& s, const Geometry<double>& g) {
    SweepRecord rec;
    rec.eps = *s.eps;
    const double eps = to_double(*s.eps);
    rec.sup_phi_sq = sup_norm_sq(s.phi);
    rec.reducible = std::sqrt(rec.sup_phi_sq) <= 1e-8;
    rec.norm_T_deriv_sq = l2_norm_sq(nabla_reeb_block(s.phi, s.a, g));
    rec.norm_Xi_deriv_sq = l2_norm_sq(nabla_horizontal_block(s.phi, s.a, g));
    std::vector<double> ab(s.backend().sites()), aa(s.backend().sites());
    for (std::size_t k = 0; k < ab.size(); ++k) {
        ab[k] = s.phi.alpha[k].norm2() * s.phi.beta[k].norm2();
        aa[k] = s.phi.alpha[k].norm2();
    }
    rec.norm_alpha_beta_cross = 2.0 * integrate(s.backend(), ab);
    rec.energy_balance_gap = eps * eps * integrate(s.backend(), aa) -
                           (rec.norm_T_deriv_sq / (eps * eps) + rec.norm_Xi_deriv_sq + rec.norm_alpha_beta_cross);
    MonopoleState<B> limit = s;
    limit.eps.reset();
    const DComplex inv_sqrt2(1.0 / std::sqrt(2.0));
    for (std::size_t k = 0; k < ab.size(); ++k) {
        limit.phi.alpha[k] = inv_sqrt2 * limit.phi.alpha[k];
        limit.phi.beta[k] = inv_sqrt2 * limit.phi.beta[k];
    }
    const auto rep = contact_residual(limit, g);
    rec.limit_residual = rep.total;
    rec.limit_constraint = rep.r_constraint;
    return rec;
}

template <class B>
SweepResult sweep(std::shared_ptr<const B> backend, const std::vector<Rational>& eps_list, std::uint64_t seed,
                  const SolveOptions& opts = {}) {
    if (eps_list.empty()) throw std::invalid_argument("empty eps list");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0)) throw std::invalid_argument("eps values must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("eps list must be strictly decreasing");
    }
    const auto ph = derive_ph_invariants(backend->model());
    if (!ph.torsion_free()) throw TorsionError("the sweep needs vanishing torsion");
    const auto g = make_geometry<double>(backend->model(), ph);
    SweepResult out;
    out.sup_tw_bound = -4.0 * g.tw;
    MonopoleState<B> state = random_state(backend, seed, eps_list.front());
    for (const auto& eps : eps_list) {
        state.eps = eps;
        SweepRecord rec;
        try {
            auto res = solve(state, opts);
            state = res.state;
            rec = sweep_diagnostics(state, g);
            rec.iterations = res.iterations;
            rec.converged = res.converged;
            rec.total = res.report.total;
        } catch (const std::exception& e) {
            out.error = e.what();
            break;
        }
        out.records.push_back(rec);
    }
    const bool any_reducible =
        std::any_of(out.records.begin(), out.records.end(), [](const SweepRecord& r) { return r.reducible; });
    if (out.records.size() >= 2 && !any_reducible) {
        std::vector<double> e, t, x;
        for (const auto& r : out.records) {
            e.push_back(to_double(r.eps));
            t.push_back(r.norm_T_deriv_sq);
            x.push_back(r.norm_Xi_deriv_sq);
        }
        out.slope_T = loglog_slope(e, t);
        out.slope_Xi = loglog_slope(e, x);
    }
    return out;
}

}  // namespace cmw
