#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitgates/dataset.hpp"
#include "splitgates/grouping.hpp"
#include "splitgates/learners.hpp"
#include "splitgates/parallel.hpp"
#include "splitgates/splits.hpp"
#include "splitgates/stats.hpp"

namespace splitgates {

// GATES estimate from a single evaluation fold: per-group point estimates,
// within-split conditional variances, arm counts, and the diagnostic cutoffs.
struct SplitGatesEstimate {
    int split_index = 0;
    std::vector<double> gamma_hat;  // K
    std::vector<double> neyman_var; // K, conditional variance estimates
    int n_treated = 0;
    int n_control = 0;
    std::vector<std::array<int, 2>> group_counts; // per group: {treated, control}
    GroupCutoffs cutoffs;
};

// Aggregated cross-fit result. gamma_hat is the plain mean of the per-split
// estimates; the variance subtracts the cross-fitting efficiency gain and is
// floored at the independent-splits bound.
struct GatesResult {
    std::vector<double> gamma_hat;
    std::vector<double> variance;
    std::vector<double> ci_lower;
    std::vector<double> ci_upper;
    double alpha = 0.05;
    std::vector<SplitGatesEstimate> per_split;
    std::vector<double> across_split_var; // V^2_k
    int l_splits = 0;
    int k_groups = 0;
    std::string learner_id;
    std::uint64_t seed = 0;
    double cpu_seconds = 0.0;
    std::string variance_note = "neyman plug-in with nadeau-bengio correction (approximation)";

    // Per-split trained proxies, kept for simulation truth evaluation.
    std::vector<ScoreModel> split_models;
};

struct ContrastResult {
    double estimate = 0.0;
    double variance = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double alpha = 0.05;
    std::vector<double> per_split_delta;
    double across_split_var = 0.0;
};

// The group-k GATE estimator on one evaluation fold:
//   gamma_k = (K/N1) sum_i Y_i D_i f_k(Z_i) - (K/N0) sum_i Y_i (1-D_i) f_k(Z_i)
// with f_k realized by rank-based group assignment. This is a whole-fold sum
// with indicator weights, not a within-group difference in means.
//
// The conditional variance is the Neyman two-sample form scaled by K^2,
//   v_k = K^2 (s2_{1k}/N1 + s2_{0k}/N0),
// treating the grouping as fixed; a group-arm cell with fewer than two units
// falls back to the pooled arm variance.
inline SplitGatesEstimate estimate_gates_split(const ExperimentDataset& eval,
                                               const std::vector<double>& scores,
                                               int k_groups) {
    const auto m = eval.n();
    if (scores.size() != static_cast<std::size_t>(m))
        throw std::invalid_argument("estimate_gates_split: scores not aligned with rows");
    const auto assignment = assign_groups(scores, k_groups);

    SplitGatesEstimate est;
    est.cutoffs = compute_cutoffs(scores, k_groups);
    const int K = k_groups;
    int n1 = 0, n0 = 0;
    std::vector<std::vector<double>> cell_y1(static_cast<std::size_t>(K));
    std::vector<std::vector<double>> cell_y0(static_cast<std::size_t>(K));
    std::vector<double> arm_y1, arm_y0;
    std::vector<double> sum1(static_cast<std::size_t>(K), 0.0);
    std::vector<double> sum0(static_cast<std::size_t>(K), 0.0);

    for (Eigen::Index i = 0; i < m; ++i) {
        const auto k = static_cast<std::size_t>(assignment.group_of[static_cast<std::size_t>(i)] - 1);
        if (eval.d(i) == 1) {
            ++n1;
            sum1[k] += eval.y(i);
            cell_y1[k].push_back(eval.y(i));
            arm_y1.push_back(eval.y(i));
        } else {
            ++n0;
            sum0[k] += eval.y(i);
            cell_y0[k].push_back(eval.y(i));
            arm_y0.push_back(eval.y(i));
        }
    }
    if (n1 == 0 || n0 == 0)
        throw std::invalid_argument("estimate_gates_split: empty arm in the evaluation fold");

    est.n_treated = n1;
    est.n_control = n0;
    const double pooled1 = sample_variance(arm_y1);
    const double pooled0 = sample_variance(arm_y0);

    est.gamma_hat.resize(static_cast<std::size_t>(K));
    est.neyman_var.resize(static_cast<std::size_t>(K));
    est.group_counts.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        est.gamma_hat[ku] = (static_cast<double>(K) / n1) * sum1[ku] -
                            (static_cast<double>(K) / n0) * sum0[ku];
        const double s2_1 = cell_y1[ku].size() >= 2 ? sample_variance(cell_y1[ku]) : pooled1;
        const double s2_0 = cell_y0[ku].size() >= 2 ? sample_variance(cell_y0[ku]) : pooled0;
        est.neyman_var[ku] =
            static_cast<double>(K) * static_cast<double>(K) * (s2_1 / n1 + s2_0 / n0);
        est.group_counts[ku] = {static_cast<int>(cell_y1[ku].size()),
                                static_cast<int>(cell_y0[ku].size())};
    }
    return est;
}

// Variance of an average over L cross-fitting splits:
//   V = V(split estimate) - ((L-1)/L) E(V^2),
// with V(split estimate) estimated by the mean of the per-split conditional
// variances and V^2 by the across-split sample variance. Floored at vbar/L,
// the value the identity gives for independent splits.
inline double nadeau_bengio_variance(const std::vector<double>& split_estimates,
                                     const std::vector<double>& split_variances) {
    const auto L = split_estimates.size();
    if (L < 2 || split_variances.size() != L)
        throw std::invalid_argument("nadeau_bengio_variance: need L >= 2 matched inputs");
    const double vbar = mean(split_variances);
    const double v2 = sample_variance(split_estimates);
    const double lf = static_cast<double>(L);
    return std::max(vbar - (lf - 1.0) / lf * v2, vbar / lf);
}

inline std::vector<double> variance_nadeau_bengio(const std::vector<SplitGatesEstimate>& per_split,
                                                  int l_splits) {
    if (l_splits < 2 || per_split.size() != static_cast<std::size_t>(l_splits))
        throw std::invalid_argument("variance_nadeau_bengio: need L >= 2 split estimates");
    const auto K = per_split.front().gamma_hat.size();
    std::vector<double> variance(K);
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> gammas, vars;
        gammas.reserve(per_split.size());
        vars.reserve(per_split.size());
        for (const auto& est : per_split) {
            gammas.push_back(est.gamma_hat[k]);
            vars.push_back(est.neyman_var[k]);
        }
        variance[k] = nadeau_bengio_variance(gammas, vars);
    }
    return variance;
}

using OutcomeTransform = std::function<double(double, const Eigen::RowVectorXd&)>;

namespace detail {

inline SplitPlan plan_with_both_arms(const ExperimentDataset& data, const SplitKind& kind,
                                     std::uint64_t seed) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        SplitPlan plan = make_split_plan(static_cast<int>(data.n()), kind,
                                        derive_seed(seed, 17, static_cast<std::uint64_t>(attempt)));
        bool ok = true;
        for (const auto& fold : plan.folds) {
            int n1 = 0, n0 = 0;
            for (int i : fold) (data.d(i) == 1 ? n1 : n0)++;
            if (n1 == 0 || n0 == 0) {
                ok = false;
                break;
            }
        }
        if (ok) return plan;
    }
    throw std::runtime_error("could not draw a split plan with both arms in every fold");
}

// Shared cross-fitting engine. The proxy is always trained on the original
// outcome; eval_y supplies the (possibly transformed) outcome the estimator
// is applied to.
inline GatesResult cross_fit_core(const ExperimentDataset& data, const Eigen::VectorXd& eval_y,
                                  int l_splits, int k_groups, const LambdaRule& learner,
                                  double alpha, std::uint64_t seed, unsigned threads) {
    if (l_splits < 2)
        throw std::invalid_argument("cross_fit_gates: L must be at least 2");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("cross_fit_gates: alpha must be in (0, 1)");
    validate_dataset(data);

    const SplitPlan plan = plan_with_both_arms(data, CrossFit{l_splits}, seed);

    GatesResult result;
    result.l_splits = l_splits;
    result.k_groups = k_groups;
    result.alpha = alpha;
    result.seed = seed;
    result.per_split.resize(static_cast<std::size_t>(l_splits));
    result.split_models.resize(static_cast<std::size_t>(l_splits));
    std::vector<double> split_cpu(static_cast<std::size_t>(l_splits), 0.0);

    parallel_for(static_cast<std::size_t>(l_splits), threads, [&](std::size_t ell) {
        ThreadCpuTimer timer;
        std::vector<int> train_rows;
        for (std::size_t f = 0; f < plan.folds.size(); ++f) {
            if (f == ell) continue;
            train_rows.insert(train_rows.end(), plan.folds[f].begin(), plan.folds[f].end());
        }
        const ExperimentDataset train = data.subset(train_rows);
        const ScoreModel proxy = fit_proxy(train, learner, derive_seed(seed, 23, ell));

        ExperimentDataset eval = data.subset(plan.folds[ell]);
        for (std::size_t i = 0; i < plan.folds[ell].size(); ++i)
            eval.y(static_cast<Eigen::Index>(i)) = eval_y(plan.folds[ell][i]);

        const Eigen::VectorXd s = proxy.score_all(eval.z);
        const std::vector<double> scores(s.data(), s.data() + s.size());
        SplitGatesEstimate est = estimate_gates_split(eval, scores, k_groups);
        est.split_index = static_cast<int>(ell);
        result.per_split[ell] = std::move(est);
        result.split_models[ell] = proxy;
        split_cpu[ell] = timer.elapsed();
    });

    result.learner_id = result.split_models.front().learner_id;
    for (double t : split_cpu) result.cpu_seconds += t;

    const auto K = static_cast<std::size_t>(k_groups);
    result.gamma_hat.assign(K, 0.0);
    result.across_split_var.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> gammas;
        gammas.reserve(result.per_split.size());
        for (const auto& est : result.per_split) gammas.push_back(est.gamma_hat[k]);
        result.gamma_hat[k] = mean(gammas);
        result.across_split_var[k] = sample_variance(gammas);
    }
    result.variance = variance_nadeau_bengio(result.per_split, l_splits);

    const double z = normal_quantile(1.0 - alpha / 2.0);
    result.ci_lower.resize(K);
    result.ci_upper.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double half = z * std::sqrt(result.variance[k]);
        result.ci_lower[k] = result.gamma_hat[k] - half;
        result.ci_upper[k] = result.gamma_hat[k] + half;
    }
    return result;
}

} // namespace detail

// Cross-fit GATES: each fold serves once as evaluation data while the proxy
// trains on the remaining L-1 folds; estimates are averaged across splits.
// With L=3 the effective train/eval split is 67%/33%, with L=5 it is 80%/20%.
inline GatesResult cross_fit_gates(const ExperimentDataset& data, int l_splits, int k_groups,
                                   const LambdaRule& learner, double alpha, std::uint64_t seed,
                                   unsigned threads = 1) {
    return detail::cross_fit_core(data, data.y, l_splits, k_groups, learner, alpha, seed,
                                  threads);
}

// Classification analysis: the estimator runs on g(Y_i, Z_i) in place of the
// outcome, while the proxy (and hence the grouping) is still trained on Y.
// With the same seed, g(y, z) = y reproduces cross_fit_gates exactly.
inline GatesResult clan(const ExperimentDataset& data, const OutcomeTransform& g, int l_splits,
                        int k_groups, const LambdaRule& learner, double alpha,
                        std::uint64_t seed, unsigned threads = 1) {
    Eigen::VectorXd gy(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) gy(i) = g(data.y(i), data.z.row(i));
    if (!gy.allFinite())
        throw std::invalid_argument("clan: transform produced non-finite values");
    return detail::cross_fit_core(data, gy, l_splits, k_groups, learner, alpha, seed,
                                  threads);
}

// Most-vs-least-affected contrast gamma_K - gamma_1. Within a split the two
// groups are disjoint, so the conditional covariance is zero and the split
// variance is the sum; aggregation reuses the Nadeau-Bengio combination on
// the per-split differences.
inline ContrastResult heterogeneity_contrast(const GatesResult& result) {
    if (result.k_groups < 2)
        throw std::invalid_argument("heterogeneity_contrast: need at least 2 groups");
    if (result.per_split.size() < 2)
        throw std::invalid_argument("heterogeneity_contrast: per-split estimates required");
    const auto last = static_cast<std::size_t>(result.k_groups - 1);

    ContrastResult contrast;
    contrast.alpha = result.alpha;
    std::vector<double> vars;
    for (const auto& est : result.per_split) {
        contrast.per_split_delta.push_back(est.gamma_hat[last] - est.gamma_hat[0]);
        vars.push_back(est.neyman_var[last] + est.neyman_var[0]);
    }
    contrast.estimate = mean(contrast.per_split_delta);
    contrast.across_split_var = sample_variance(contrast.per_split_delta);
    contrast.variance = nadeau_bengio_variance(contrast.per_split_delta, vars);
    const double z = normal_quantile(1.0 - result.alpha / 2.0);
    const double half = z * std::sqrt(contrast.variance);
    contrast.ci_lower = contrast.estimate - half;
    contrast.ci_upper = contrast.estimate + half;
    return contrast;
}

} // namespace splitgates
