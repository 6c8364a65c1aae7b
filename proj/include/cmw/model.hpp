#pragma once

// Homogeneous contact 3-manifolds given by constant structure coefficients
// de^i = sum_{j<k} c^i_{jk} e^j ^ e^k.

#include <array>
#include <optional>
#include <string>
#include <utility>

#include "cmw/errors.hpp"
#include "cmw/forms.hpp"
#include "cmw/scalar.hpp"

namespace cmw {

// Ordered pairs j<k, in the order (0,1), (0,2), (1,2).
inline constexpr std::array<std::pair<int, int>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

constexpr int pair_index(int j, int k) {
    if (j > k) std::swap(j, k);
    return (j == 0) ? (k == 1 ? 0 : 1) : 2;
}

using StructureTable = std::array<std::array<Rational, 3>, 3>;  // [i][pair_index]

template <class S>
S lift_rational(const Rational& r) {
    if constexpr (std::is_same_v<S, DComplex>) {
        return DComplex(to_double(r));
    } else if constexpr (std::is_same_v<S, double>) {
        return to_double(r);
    } else {
        return S(r);
    }
}

class ModelStructure {
public:
    const std::string& name() const { return name_; }
    const StructureTable& table() const { return c_; }

    // c^i_{jk} with the antisymmetry c^i_{kj} = -c^i_{jk}.
    Rational c(int i, int j, int k) const {
        if (j == k) return Rational(0);
        const Rational v = c_[i][pair_index(j, k)];
        return j < k ? v : Rational(-v);
    }

    // de^i as an invariant 2-form.
    template <class S = ExactComplex>
    InvariantForm<S> d_basis(int i) const {
        InvariantForm<S> out(2);
        for (int p = 0; p < 3; ++p) {
            const auto [j, k] = kPairs[p];
            out.set((1 << j) | (1 << k), lift_rational<S>(c_[i][p]));
        }
        return out;
    }

    // Frame bracket [e_j, e_k] = -sum_i c^i_{jk} e_i, as components.
    std::array<Rational, 3> bracket(int j, int k) const {
        std::array<Rational, 3> out{};
        for (int i = 0; i < 3; ++i) out[i] = -c(i, j, k);
        return out;
    }

    // (p, q) when the model belongs to the de1 = 2p e2^e0, de2 = 2q e0^e1 family.
    std::optional<std::pair<Rational, Rational>> gen_parameters() const;

    bool same_structure(const ModelStructure& o) const { return c_ == o.c_; }

    friend ModelStructure make_model(const StructureTable& c, std::string name);

private:
    ModelStructure(StructureTable c, std::string name) : c_(std::move(c)), name_(std::move(name)) {}

    StructureTable c_;
    std::string name_;
};

// Exterior derivative of a form with constant coefficients.
// Degree-3 input returns the zero 3-form (there are no 4-forms).
template <class S>
InvariantForm<S> exterior_d(const InvariantForm<S>& a, const ModelStructure& m) {
    switch (a.degree()) {
        case 0:
            return InvariantForm<S>::zero(1);
        case 1: {
            InvariantForm<S> out(2);
            for (int i = 0; i < 3; ++i) out += a[1 << i] * m.d_basis<S>(i);
            return out;
        }
        case 2: {
            InvariantForm<S> out(3);
            for (const auto& [j, k] : kPairs) {
                const S& coef = a[(1 << j) | (1 << k)];
                if (is_zero(coef)) continue;
                const auto term = wedge(m.d_basis<S>(j), InvariantForm<S>::e(k)) -
                                  wedge(InvariantForm<S>::e(j), m.d_basis<S>(k));
                out += coef * term;
            }
            return out;
        }
        default:
            return InvariantForm<S>::zero(3);
    }
}

inline ModelStructure make_model(const StructureTable& c, std::string name) {
    if (c[0][pair_index(1, 2)] != 2 || c[0][pair_index(0, 1)] != 0 || c[0][pair_index(0, 2)] != 0)
        throw AdmissibilityError("model '" + name + "': de0 must equal 2 e1^e2");
    ModelStructure m(c, std::move(name));
    for (int i = 0; i < 3; ++i) {
        const ExactForm dd = exterior_d(m.d_basis(i), m);
        if (!dd.is_zero())
            throw JacobiError("model '" + m.name() + "': d(de" + std::to_string(i) + ") = " +
                              to_string(dd[7].re) + " e0e1e2 != 0");
    }
    return m;
}

inline StructureTable gen_table(const Rational& p, const Rational& q) {
    StructureTable c{};
    for (auto& row : c) row.fill(Rational(0));
    c[0][pair_index(1, 2)] = 2;
    c[1][pair_index(0, 2)] = -2 * p;  // 2p e2^e0
    c[2][pair_index(0, 1)] = 2 * q;   // 2q e0^e1
    return c;
}

inline std::string gen_name(const Rational& p, const Rational& q) {
    return "gen(" + to_string(p) + "," + to_string(q) + ")";
}

inline ModelStructure make_gen(const Rational& p, const Rational& q, std::string name = {}) {
    return make_model(gen_table(p, q), name.empty() ? gen_name(p, q) : std::move(name));
}

inline std::optional<std::pair<Rational, Rational>> ModelStructure::gen_parameters() const {
    const Rational p = -c_[1][pair_index(0, 2)] / 2;
    const Rational q = c_[2][pair_index(0, 1)] / 2;
    if (c_ == gen_table(p, q)) return std::make_pair(p, q);
    return std::nullopt;
}

inline ModelStructure heisenberg() { return make_gen(0, 0, "heisenberg"); }
inline ModelStructure round_s3() { return make_gen(1, 1, "round-s3"); }
inline ModelStructure torsion_model() { return make_gen(1, -1, "torsion"); }

inline bool is_heisenberg(const ModelStructure& m) { return m.same_structure(heisenberg()); }

// Catalog lookup by name: "heisenberg", "round-s3", "torsion", or "gen(p,q)".
inline ModelStructure catalog_model(const std::string& name) {
    if (name == "heisenberg") return heisenberg();
    if (name == "round-s3") return round_s3();
    if (name == "torsion") return torsion_model();
    if (name.rfind("gen(", 0) == 0 && name.back() == ')') {
        const std::string inner = name.substr(4, name.size() - 5);
        const auto comma = inner.find(',');
        if (comma == std::string::npos) throw ParseError("malformed model name '" + name + "'");
        return make_gen(parse_rational(inner.substr(0, comma)), parse_rational(inner.substr(comma + 1)));
    }
    throw ParseError("unknown model '" + name + "'");
}

}  // namespace cmw
