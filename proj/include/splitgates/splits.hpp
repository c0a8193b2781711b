#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "splitgates/rng.hpp"

namespace splitgates {

// L-fold cross-fitting partition. Fold sizes differ by at most one; the
// remainder goes one unit at a time to the first n % L folds.
struct CrossFit {
    int l_splits;
};

// Two-fold main/auxiliary bipartition; fold 0 is the main (evaluation) fold
// of size round(n * main_fraction), fold 1 is the auxiliary fold.
struct MainAux {
    double main_fraction;
};

using SplitKind = std::variant<CrossFit, MainAux>;

struct SplitPlan {
    SplitKind kind;
    std::vector<std::vector<int>> folds;
    std::uint64_t seed = 0;
};

// Uniformly random partition of {0..n-1}, fully determined by the seed.
inline SplitPlan make_split_plan(int n, const SplitKind& kind, std::uint64_t seed) {
    if (n < 2)
        throw std::invalid_argument("make_split_plan: n must be at least 2");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    SplitPlan plan;
    plan.kind = kind;
    plan.seed = seed;

    if (const auto* cf = std::get_if<CrossFit>(&kind)) {
        const int L = cf->l_splits;
        if (L < 2)
            throw std::invalid_argument("make_split_plan: L must be at least 2");
        if (n < 2 * L)
            throw std::invalid_argument("make_split_plan: need n >= 2L");
        const int base = n / L;
        const int rem = n % L;
        std::size_t pos = 0;
        for (int f = 0; f < L; ++f) {
            const int size = base + (f < rem ? 1 : 0);
            plan.folds.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
            pos += static_cast<std::size_t>(size);
        }
    } else {
        const double frac = std::get<MainAux>(kind).main_fraction;
        if (!(frac > 0.0 && frac < 1.0))
            throw std::invalid_argument("make_split_plan: main_fraction must be in (0, 1)");
        const int m = static_cast<int>(std::lround(frac * n));
        if (m < 1 || m > n - 1)
            throw std::invalid_argument("make_split_plan: fold would be empty");
        plan.folds.emplace_back(order.begin(), order.begin() + m);
        plan.folds.emplace_back(order.begin() + m, order.end());
    }
    return plan;
}

} // namespace splitgates
