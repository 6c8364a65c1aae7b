// Solve the contact monopole equations on the Heisenberg invariant sector from
// several seeds and compare each solution with the closed-form family
// 2 a0 = |alpha|^2 - |beta|^2.

#include <cmath>
#include <cstdio>
#include <memory>

#include "cmw/monopole.hpp"

int main() {
    using namespace cmw;
    const auto backend = std::make_shared<const InvariantBackend<double>>(heisenberg());
    std::printf("%4s %12s %12s %12s %10s %12s\n", "seed", "|alpha|^2", "|beta|^2", "a0", "iters", "gap");
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto res = solve(random_state(backend, seed, std::nullopt));
        const auto& s = res.state;
        std::printf("%4llu %12.6f %12.6f %12.6f %10d %12.3e%s\n", static_cast<unsigned long long>(seed),
                    s.phi.alpha[0].norm2(), s.phi.beta[0].norm2(), s.a.comp[0][0], res.iterations,
                    closed_form_gap(s), res.converged ? "" : "  (not converged)");
    }
    return 0;
}
