// Pseudohermitian and Riemannian invariants of the catalog models and of
// gen(p, q) for p, q given on the command line, e.g. demo_catalog_invariants 1/2 -3.

#include <iostream>
#include <vector>

#include "cmw/clifford.hpp"
#include "cmw/pseudohermitian.hpp"

int main(int argc, char** argv) {
    using namespace cmw;
    std::vector<ModelStructure> models{heisenberg(), round_s3(), torsion_model()};
    try {
        if (argc == 3) models.push_back(make_gen(parse_rational(argv[1]), parse_rational(argv[2])));
        for (const auto& m : models) {
            const PhInvariants ph = derive_ph_invariants(m);
            const Rational half(1, 2);
            const auto cmp = curvature_comparison(m, half);
            std::cout << m.name() << "\n"
                      << "  omega        = " << to_string(ph.omega[1].re) << " e0 + " << to_string(ph.omega[2].re)
                      << " e1 + " << to_string(ph.omega[4].re) << " e2\n"
                      << "  torsion A    = " << ph.torsion << "\n"
                      << "  W            = " << to_string(ph.tw_curv.re) << "\n"
                      << "  R at eps=1/2 = " << to_string(cmp.oracle_value) << " (closed form "
                      << to_string(cmp.closed_form_value) << ")\n"
                      << "  structure equations hold: " << std::boolalpha << check_structure_equations(m, ph).all()
                      << "\n";
            if (ph.torsion_free())
                std::cout << "  D Phi0 / Phi0 at eps=1/2 = " << clifford_identities(m, half).eigenvalue << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
