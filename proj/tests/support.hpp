#pragma once

#include <random>
#include <utility>
#include <vector>

#include "cmw/model.hpp"

namespace cmw::testing {

inline Rational random_rational(std::mt19937_64& rng, int max_num = 9, int max_den = 7) {
    std::uniform_int_distribution<int> num(-max_num, max_num);
    std::uniform_int_distribution<int> den(1, max_den);
    return Rational(num(rng), den(rng));
}

inline std::vector<std::pair<Rational, Rational>> random_pq(unsigned seed, int count) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<Rational, Rational>> out;
    for (int i = 0; i < count; ++i) {
        const Rational p = random_rational(rng);
        out.emplace_back(p, random_rational(rng));
    }
    return out;
}

inline std::vector<ModelStructure> catalog() { return {heisenberg(), round_s3(), torsion_model()}; }

}  // namespace cmw::testing
