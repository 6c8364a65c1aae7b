#pragma once

// Exact Gaussian elimination over a field.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "cmw/scalar.hpp"

namespace cmw {

template <class F>
struct LinearSolution {
    std::vector<F> x;   // particular solution, free variables set to zero
    std::size_t rank = 0;
    bool unique() const { return rank == x.size(); }
};

// Solves A x = b, A given row-major as rows x cols. Returns nullopt if inconsistent.
template <class F>
std::optional<LinearSolution<F>> solve_exact(std::vector<std::vector<F>> a, std::vector<F> b) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && is_zero(a[p][c])) ++p;
        if (p == rows) continue;
        std::swap(a[p], a[r]);
        std::swap(b[p], b[r]);
        const F inv = F(1) / a[r][c];
        for (std::size_t k = c; k < cols; ++k) a[r][k] = a[r][k] * inv;
        b[r] = b[r] * inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || is_zero(a[i][c])) continue;
            const F f = a[i][c];
            for (std::size_t k = c; k < cols; ++k) a[i][k] = a[i][k] - f * a[r][k];
            b[i] = b[i] - f * b[r];
        }
        pivot_col.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < rows; ++i)
        if (!is_zero(b[i])) return std::nullopt;
    LinearSolution<F> sol;
    sol.x.assign(cols, F(0));
    sol.rank = r;
    for (std::size_t i = 0; i < r; ++i) sol.x[pivot_col[i]] = b[i];
    return sol;
}

}  // namespace cmw
