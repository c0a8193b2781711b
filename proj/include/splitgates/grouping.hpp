#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace splitgates {

// Sorted-group score thresholds. cutoffs[k] for k = 1..K-1 is the estimated
// k/K upper quantile of the scores:
//   c_k = inf{ c : #{S > c} <= m * k / K },
// realized as the (floor(m*k/K) + 1)-th largest score. The endpoints carry
// +inf / -inf sentinels so the top-scoring unit stays in group 1 (the literal
// c_0 = max(S) would eject it).
struct GroupCutoffs {
    int k_groups = 0;
    std::vector<double> cutoffs; // indexed 0..K

    double lower(int k) const { return cutoffs[static_cast<std::size_t>(k)]; }
    double upper(int k) const { return cutoffs[static_cast<std::size_t>(k - 1)]; }
};

// K-way grouping of an evaluation fold; group_of[i] in 1..K, group 1 holds
// the highest scores.
struct GroupAssignment {
    int k_groups = 0;
    std::vector<int> group_of;

    std::vector<int> group_sizes() const {
        std::vector<int> sizes(static_cast<std::size_t>(k_groups), 0);
        for (int g : group_of) sizes[static_cast<std::size_t>(g - 1)]++;
        return sizes;
    }
};

namespace detail {

inline void check_scores(const std::vector<double>& scores, int k_groups) {
    if (k_groups < 2)
        throw std::invalid_argument("grouping: need at least 2 groups");
    if (scores.size() < static_cast<std::size_t>(k_groups))
        throw std::invalid_argument("grouping: fewer scores than groups");
    for (double s : scores)
        if (!std::isfinite(s))
            throw std::invalid_argument("grouping: non-finite score");
}

// Indices sorted by score descending, ties broken by ascending unit index.
inline std::vector<int> descending_order(const std::vector<double>& scores) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    });
    return order;
}

} // namespace detail

inline GroupCutoffs compute_cutoffs(const std::vector<double>& scores, int k_groups) {
    detail::check_scores(scores, k_groups);
    const std::size_t m = scores.size();
    std::vector<double> sorted(scores);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());

    GroupCutoffs cuts;
    cuts.k_groups = k_groups;
    cuts.cutoffs.resize(static_cast<std::size_t>(k_groups) + 1);
    cuts.cutoffs[0] = std::numeric_limits<double>::infinity();
    cuts.cutoffs[static_cast<std::size_t>(k_groups)] = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < k_groups; ++k) {
        const auto t = static_cast<std::size_t>(
            (m * static_cast<std::size_t>(k)) / static_cast<std::size_t>(k_groups));
        cuts.cutoffs[static_cast<std::size_t>(k)] = sorted[t]; // (t+1)-th largest
    }
    return cuts;
}

// Rank-based assignment: units sorted by score descending (ties by ascending
// index) fill groups 1..K in order; when K does not divide m the first m % K
// groups take one extra unit. This is the canonical grouping used by the
// estimators; cutoffs are still reported for diagnostics.
inline GroupAssignment assign_groups(const std::vector<double>& scores, int k_groups) {
    detail::check_scores(scores, k_groups);
    const std::size_t m = scores.size();
    const auto order = detail::descending_order(scores);

    GroupAssignment assignment;
    assignment.k_groups = k_groups;
    assignment.group_of.resize(m);
    const std::size_t base = m / static_cast<std::size_t>(k_groups);
    const std::size_t rem = m % static_cast<std::size_t>(k_groups);
    std::size_t pos = 0;
    for (int k = 1; k <= k_groups; ++k) {
        const std::size_t size = base + (static_cast<std::size_t>(k) <= rem ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i)
            assignment.group_of[static_cast<std::size_t>(order[pos++])] = k;
    }
    return assignment;
}

// Membership by cutoff: group k is the half-open score interval
// (c_k, c_{k-1}]. With distinct scores and K | m this reproduces
// assign_groups exactly. Returns 0 for a score that lands in no group, which
// can only happen when every score ties with a cutoff boundary.
inline int cutoff_group_of(double score, const GroupCutoffs& cuts) {
    for (int k = 1; k <= cuts.k_groups; ++k) {
        if (score > cuts.lower(k) && score <= cuts.upper(k)) return k;
    }
    return 0;
}

} // namespace splitgates
