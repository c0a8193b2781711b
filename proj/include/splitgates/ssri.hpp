#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitgates/dataset.hpp"
#include "splitgates/gates.hpp"
#include "splitgates/learners.hpp"
#include "splitgates/parallel.hpp"
#include "splitgates/splits.hpp"
#include "splitgates/stats.hpp"

namespace splitgates {

// How the per-split conditional CI level relates to the target level. The
// halved rule builds each conditional CI at 1 - alpha/2 so the median-of-
// bounds interval targets 1 - alpha; nominal keeps 1 - alpha per split.
enum class LevelAdjust { Halved, Nominal };

inline std::string to_string(LevelAdjust adjust) {
    return adjust == LevelAdjust::Halved ? "halved" : "nominal";
}

inline LevelAdjust level_adjust_from_string(const std::string& s) {
    if (s == "halved") return LevelAdjust::Halved;
    if (s == "nominal") return LevelAdjust::Nominal;
    throw std::invalid_argument("unknown level_adjust '" + s + "'");
}

struct SsriSplitRecord {
    int split_index = 0;
    std::vector<double> gamma_hat;
    std::vector<double> ci_lower; // conditional bounds
    std::vector<double> ci_upper;
    std::vector<double> neyman_var;
    bool baseline_used = false;
    double wall_clock = 0.0; // CPU seconds for this split's work
    GroupCutoffs cutoffs;

    // Trained proxy, kept for simulation truth evaluation.
    ScoreModel model;
};

struct SsriResult {
    std::vector<double> point_median;
    std::vector<double> point_mean;
    std::vector<double> ci_lower; // unconditional: medians of conditional bounds
    std::vector<double> ci_upper;
    int n_splits = 0;
    double main_fraction = 0.0;
    double alpha = 0.05;
    int k_groups = 0;
    bool baseline = false;
    LevelAdjust level_adjust = LevelAdjust::Halved;
    std::string learner_id;
    std::uint64_t seed = 0;
    std::vector<SsriSplitRecord> records;
    double total_wall_clock = 0.0;
};

// Elementwise medians of per-split points and conditional bounds; the even
// count median is the midpoint of the two central order statistics.
inline void median_aggregate(const std::vector<SsriSplitRecord>& records,
                             std::vector<double>& point, std::vector<double>& lower,
                             std::vector<double>& upper) {
    if (records.empty())
        throw std::invalid_argument("median_aggregate: no records");
    const auto K = records.front().gamma_hat.size();
    point.resize(K);
    lower.resize(K);
    upper.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> g, lo, hi;
        g.reserve(records.size());
        for (const auto& rec : records) {
            g.push_back(rec.gamma_hat[k]);
            lo.push_back(rec.ci_lower[k]);
            hi.push_back(rec.ci_upper[k]);
        }
        point[k] = median(g);
        lower[k] = median(lo);
        upper[k] = median(hi);
    }
}

// Split-sample robust inference: S independent main/auxiliary splits. Each
// split trains the proxy (and optionally a control-arm baseline model) on the
// auxiliary fold and estimates GATES with a conditional CI on the main fold;
// the unconditional interval takes medians of the conditional bounds across
// splits. Per-split sub-seeds derive from (seed, s), so results do not depend
// on scheduling.
inline SsriResult ssri_gates(const ExperimentDataset& data, int n_splits, double main_fraction,
                             int k_groups, const LambdaRule& learner, double alpha,
                             bool baseline, std::uint64_t seed, unsigned threads = 1,
                             LevelAdjust level_adjust = LevelAdjust::Halved) {
    if (n_splits < 1)
        throw std::invalid_argument("ssri_gates: need at least 1 split");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("ssri_gates: alpha must be in (0, 1)");
    validate_dataset(data);

    const double conditional_alpha =
        level_adjust == LevelAdjust::Halved ? alpha / 2.0 : alpha;
    const double z = normal_quantile(1.0 - conditional_alpha / 2.0);

    SsriResult result;
    result.n_splits = n_splits;
    result.main_fraction = main_fraction;
    result.alpha = alpha;
    result.k_groups = k_groups;
    result.baseline = baseline;
    result.level_adjust = level_adjust;
    result.seed = seed;
    result.records.resize(static_cast<std::size_t>(n_splits));

    parallel_for(static_cast<std::size_t>(n_splits), threads, [&](std::size_t s) {
        ThreadCpuTimer timer;
        const std::uint64_t split_seed = derive_seed(seed, s);

        SsriSplitRecord rec;
        std::string last_error;
        bool done = false;
        // A failing learner gets a fresh sub-seed; persistent failure is an error.
        for (std::uint64_t attempt = 0; attempt < 10 && !done; ++attempt) {
            try {
                const SplitPlan plan = detail::plan_with_both_arms(
                    data, MainAux{main_fraction}, derive_seed(split_seed, attempt));
                ExperimentDataset main = data.subset(plan.folds[0]);
                const ExperimentDataset aux = data.subset(plan.folds[1]);

                const ScoreModel proxy =
                    fit_proxy(aux, learner, derive_seed(split_seed, 23, attempt));
                if (baseline) {
                    const BaselineModel base =
                        fit_baseline(aux, derive_seed(split_seed, 29, attempt));
                    main.y -= base.predict_all(main.z);
                }

                const Eigen::VectorXd sc = proxy.score_all(main.z);
                const std::vector<double> scores(sc.data(), sc.data() + sc.size());
                const SplitGatesEstimate est = estimate_gates_split(main, scores, k_groups);

                rec.split_index = static_cast<int>(s);
                rec.gamma_hat = est.gamma_hat;
                rec.neyman_var = est.neyman_var;
                rec.cutoffs = est.cutoffs;
                rec.baseline_used = baseline;
                rec.model = proxy;
                rec.ci_lower.resize(est.gamma_hat.size());
                rec.ci_upper.resize(est.gamma_hat.size());
                for (std::size_t k = 0; k < est.gamma_hat.size(); ++k) {
                    const double half = z * std::sqrt(est.neyman_var[k]);
                    rec.ci_lower[k] = est.gamma_hat[k] - half;
                    rec.ci_upper[k] = est.gamma_hat[k] + half;
                }
                done = true;
            } catch (const std::exception& e) {
                last_error = e.what();
            }
        }
        if (!done)
            throw std::runtime_error("ssri_gates: split " + std::to_string(s) +
                                     " failed after 10 attempts: " + last_error);
        rec.wall_clock = timer.elapsed();
        result.records[s] = std::move(rec);
    });

    result.learner_id = result.records.front().model.learner_id;
    for (const auto& rec : result.records) result.total_wall_clock += rec.wall_clock;

    median_aggregate(result.records, result.point_median, result.ci_lower, result.ci_upper);
    result.point_mean.resize(static_cast<std::size_t>(k_groups));
    for (std::size_t k = 0; k < static_cast<std::size_t>(k_groups); ++k) {
        std::vector<double> g;
        g.reserve(result.records.size());
        for (const auto& rec : result.records) g.push_back(rec.gamma_hat[k]);
        result.point_mean[k] = mean(g);
    }
    return result;
}

} // namespace splitgates
