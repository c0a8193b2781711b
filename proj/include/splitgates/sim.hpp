#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitgates/dgp.hpp"
#include "splitgates/gates.hpp"
#include "splitgates/grouping.hpp"
#include "splitgates/parallel.hpp"
#include "splitgates/ssri.hpp"

namespace splitgates {

struct RiMethod {
    int l_splits = 3;
};

struct SsriMethod {
    int n_splits = 250;
    double main_fraction = 0.33;
    bool baseline = true;
    LevelAdjust level_adjust = LevelAdjust::Halved;
};

struct MethodConfig {
    enum class Kind { Ri, Ssri } kind = Kind::Ri;
    RiMethod ri;
    SsriMethod ssri;

    std::string id() const {
        if (kind == Kind::Ri) return "ri_l" + std::to_string(ri.l_splits);
        return "ssri_s" + std::to_string(ssri.n_splits) + "_m" +
               std::to_string(static_cast<int>(std::lround(ssri.main_fraction * 100.0))) +
               (ssri.baseline ? "_base" : "_nobase");
    }

    // Fraction of the sample each split evaluates on; determines the estimand
    // geometry the reported truth is computed under.
    double eval_fraction() const {
        if (kind == Kind::Ri) return 1.0 / static_cast<double>(ri.l_splits);
        return ssri.main_fraction;
    }
};

inline MethodConfig ri_method(int l_splits) {
    MethodConfig m;
    m.kind = MethodConfig::Kind::Ri;
    m.ri.l_splits = l_splits;
    return m;
}

inline MethodConfig ssri_method(int n_splits, double main_fraction, bool baseline,
                                LevelAdjust level_adjust = LevelAdjust::Halved) {
    MethodConfig m;
    m.kind = MethodConfig::Kind::Ssri;
    m.ssri = {n_splits, main_fraction, baseline, level_adjust};
    return m;
}

struct SimulationConfig {
    DgpKind dgp = DgpKind::Linear;
    std::vector<int> sample_sizes{100, 500, 2500};
    int k_groups = 5;
    std::vector<MethodConfig> methods;
    int n_replicates = 200;
    int truth_replicates = 1000;
    int truth_population = 100000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    LambdaRule learner = CvLambda{5};
    unsigned threads = 1;
};

// One method x sample size x sorted group aggregate.
struct CellStats {
    std::string method_id;
    int n = 0;
    int group = 0; // 1..K, group 1 = highest proxy scores
    double coverage = 0.0;
    double avg_ci_length = 0.0;
    double bias = 0.0;
    double truth = 0.0;
    int n_ok = 0;
    int n_failed = 0;
};

struct MethodTiming {
    std::string method_id;
    int n = 0;
    double mean_cpu_seconds = 0.0;
};

struct SimulationReport {
    SimulationConfig config;
    std::vector<CellStats> cells;
    // Measured compute cost; reported beside the statistical results but kept
    // out of the deterministic report document.
    std::vector<MethodTiming> timings;
};

// Fresh draw from the covariate distribution with its exact CATE values;
// no noise or treatment needed for truth evaluation.
struct TruthPopulation {
    Eigen::MatrixXd z;
    Eigen::VectorXd cate;
};

inline TruthPopulation draw_truth_population(const Dgp& dgp, int n, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    TruthPopulation pop;
    pop.z.resize(n, dgp.p);
    pop.cate.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dgp.p; ++j) pop.z(i, j) = normal(rng);
        pop.cate(i) = dgp.cate(pop.z.row(i));
    }
    return pop;
}

// Group-k truth for one trained proxy: the exact mean CATE over the
// population units whose score falls in the group's cutoff interval. When a
// cutoff interval captures no one (heavily tied scores, e.g. a constant
// proxy), membership falls back to rank-based assignment of the population.
inline std::vector<double> true_gates(const TruthPopulation& pop, const ScoreModel& model,
                                      const GroupCutoffs& cuts) {
    const int K = cuts.k_groups;
    const Eigen::VectorXd scores = model.score_all(pop.z);
    std::vector<double> sum(static_cast<std::size_t>(K), 0.0);
    std::vector<long> count(static_cast<std::size_t>(K), 0);
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        const int g = cutoff_group_of(scores(i), cuts);
        if (g >= 1) {
            sum[static_cast<std::size_t>(g - 1)] += pop.cate(i);
            count[static_cast<std::size_t>(g - 1)]++;
        }
    }
    bool any_empty = false;
    for (int k = 0; k < K; ++k)
        if (count[static_cast<std::size_t>(k)] == 0) any_empty = true;
    if (any_empty) {
        std::fill(sum.begin(), sum.end(), 0.0);
        std::fill(count.begin(), count.end(), 0L);
        const std::vector<double> sv(scores.data(), scores.data() + scores.size());
        const auto assignment = assign_groups(sv, K);
        for (std::size_t i = 0; i < sv.size(); ++i) {
            const auto k = static_cast<std::size_t>(assignment.group_of[i] - 1);
            sum[k] += pop.cate(static_cast<Eigen::Index>(i));
            count[k]++;
        }
    }
    std::vector<double> truth(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
        truth[static_cast<std::size_t>(k)] =
            sum[static_cast<std::size_t>(k)] / static_cast<double>(count[static_cast<std::size_t>(k)]);
    return truth;
}

// Convenience overload drawing its own population; retries once with a
// doubled population if a cutoff interval comes up empty.
inline std::vector<double> true_gates(const Dgp& dgp, const ScoreModel& model,
                                      const GroupCutoffs& cuts, int n_population,
                                      std::uint64_t seed) {
    TruthPopulation pop = draw_truth_population(dgp, n_population, seed);
    const Eigen::VectorXd scores = model.score_all(pop.z);
    bool retry = false;
    for (int k = 1; k <= cuts.k_groups; ++k) {
        long c = 0;
        for (Eigen::Index i = 0; i < scores.size(); ++i)
            if (cutoff_group_of(scores(i), cuts) == k) ++c;
        if (c == 0) retry = true;
    }
    if (retry)
        pop = draw_truth_population(dgp, 2 * n_population, derive_seed(seed, 7));
    return true_gates(pop, model, cuts);
}

namespace detail {

struct ReplicateOutcome {
    // Per method: estimate/CI per group, replicate-level truth, cpu seconds.
    struct MethodRun {
        bool ok = false;
        std::string error;
        std::vector<double> estimate;
        std::vector<double> ci_lower;
        std::vector<double> ci_upper;
        std::vector<double> truth;
        double cpu_seconds = 0.0;
    };
    std::vector<MethodRun> runs;
};

inline std::vector<double> average_truths(const std::vector<std::vector<double>>& truths) {
    std::vector<double> avg(truths.front().size(), 0.0);
    for (const auto& t : truths)
        for (std::size_t k = 0; k < t.size(); ++k) avg[k] += t[k];
    for (auto& v : avg) v /= static_cast<double>(truths.size());
    return avg;
}

} // namespace detail

// Reported estimand truth for one split geometry: average over independent
// draws of (data -> train/eval split -> proxy -> cutoffs -> population group
// means), realizing the outer expectation over training data.
inline std::vector<double> geometry_truth(const SimulationConfig& config, const Dgp& dgp,
                                          int n, double eval_fraction) {
    const int draws = config.truth_replicates;
    std::vector<std::vector<double>> truths(static_cast<std::size_t>(draws));
    parallel_for(static_cast<std::size_t>(draws), config.threads, [&](std::size_t t) {
        const std::uint64_t s =
            derive_seed(config.seed, 0x7472757468ULL,
                        static_cast<std::uint64_t>(n) * 1000003ULL + t);
        const GeneratedSample sample = generate(dgp, n, derive_seed(s, 1));
        ExperimentDataset data = sample.data;
        const SplitPlan plan =
            detail::plan_with_both_arms(data, MainAux{eval_fraction}, derive_seed(s, 2));
        const ExperimentDataset train = data.subset(plan.folds[1]);
        const ExperimentDataset eval = data.subset(plan.folds[0]);
        const ScoreModel proxy = fit_proxy(train, config.learner, derive_seed(s, 3));
        const Eigen::VectorXd sc = proxy.score_all(eval.z);
        const std::vector<double> scores(sc.data(), sc.data() + sc.size());
        const GroupCutoffs cuts = compute_cutoffs(scores, config.k_groups);
        truths[t] = true_gates(dgp, proxy, cuts, config.truth_population, derive_seed(s, 4));
    });
    return detail::average_truths(truths);
}

// Full coverage / interval-length / compute-cost study. Fully deterministic
// given the config seed: every replicate derives its own seed and writes only
// its own slot.
inline SimulationReport run_monte_carlo(const SimulationConfig& config) {
    if (config.n_replicates < 1)
        throw std::invalid_argument("run_monte_carlo: need at least 1 replicate");
    if (config.methods.empty())
        throw std::invalid_argument("run_monte_carlo: no methods configured");
    const Dgp dgp = make_dgp(config.dgp);
    for (int n : config.sample_sizes) {
        int min_needed = 2 * config.k_groups;
        for (const auto& m : config.methods)
            if (m.kind == MethodConfig::Kind::Ri)
                min_needed = std::max(min_needed, 2 * m.ri.l_splits);
        if (n < min_needed)
            throw std::invalid_argument("run_monte_carlo: sample size " + std::to_string(n) +
                                        " too small for the configured methods");
    }

    SimulationReport report;
    report.config = config;

    // Methods sharing a split geometry share the same estimand truth.
    std::map<std::pair<int, long>, std::vector<double>> truth_cache;
    auto truth_for = [&](int n, double eval_fraction) -> const std::vector<double>& {
        const auto key = std::make_pair(n, std::lround(eval_fraction * 1e6));
        auto it = truth_cache.find(key);
        if (it == truth_cache.end())
            it = truth_cache.emplace(key, geometry_truth(config, dgp, n, eval_fraction)).first;
        return it->second;
    };

    for (int n : config.sample_sizes) {
        const auto R = static_cast<std::size_t>(config.n_replicates);
        std::vector<detail::ReplicateOutcome> outcomes(R);

        parallel_for(R, config.threads, [&](std::size_t r) {
            const std::uint64_t rep_seed =
                derive_seed(config.seed, static_cast<std::uint64_t>(n), r);
            const GeneratedSample sample = generate(dgp, n, derive_seed(rep_seed, 1));
            const TruthPopulation pop =
                draw_truth_population(dgp, config.truth_population, derive_seed(rep_seed, 2));

            detail::ReplicateOutcome& outcome = outcomes[r];
            outcome.runs.resize(config.methods.size());
            for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
                const MethodConfig& method = config.methods[mi];
                auto& run = outcome.runs[mi];
                const std::uint64_t method_seed = derive_seed(rep_seed, 3, mi);
                try {
                    if (method.kind == MethodConfig::Kind::Ri) {
                        const GatesResult res =
                            cross_fit_gates(sample.data, method.ri.l_splits, config.k_groups,
                                            config.learner, config.alpha, method_seed);
                        run.estimate = res.gamma_hat;
                        run.ci_lower = res.ci_lower;
                        run.ci_upper = res.ci_upper;
                        run.cpu_seconds = res.cpu_seconds;
                        std::vector<std::vector<double>> split_truths;
                        for (std::size_t ell = 0; ell < res.per_split.size(); ++ell)
                            split_truths.push_back(true_gates(pop, res.split_models[ell],
                                                              res.per_split[ell].cutoffs));
                        run.truth = detail::average_truths(split_truths);
                    } else {
                        const SsriResult res = ssri_gates(
                            sample.data, method.ssri.n_splits, method.ssri.main_fraction,
                            config.k_groups, config.learner, config.alpha,
                            method.ssri.baseline, method_seed, 1, method.ssri.level_adjust);
                        run.estimate = res.point_mean;
                        run.ci_lower = res.ci_lower;
                        run.ci_upper = res.ci_upper;
                        run.cpu_seconds = res.total_wall_clock;
                        std::vector<std::vector<double>> split_truths;
                        for (const auto& rec : res.records)
                            split_truths.push_back(true_gates(pop, rec.model, rec.cutoffs));
                        run.truth = detail::average_truths(split_truths);
                    }
                    run.ok = true;
                } catch (const std::exception& e) {
                    run.ok = false;
                    run.error = e.what();
                }
            }
        });

        for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
            const MethodConfig& method = config.methods[mi];
            int n_ok = 0, n_failed = 0;
            std::string first_error;
            double cpu_total = 0.0;
            const auto K = static_cast<std::size_t>(config.k_groups);
            std::vector<long> covered(K, 0);
            std::vector<double> length_sum(K, 0.0), bias_sum(K, 0.0);
            for (const auto& outcome : outcomes) {
                const auto& run = outcome.runs[mi];
                if (!run.ok) {
                    ++n_failed;
                    if (first_error.empty()) first_error = run.error;
                    continue;
                }
                ++n_ok;
                cpu_total += run.cpu_seconds;
                for (std::size_t k = 0; k < K; ++k) {
                    if (run.ci_lower[k] <= run.truth[k] && run.truth[k] <= run.ci_upper[k])
                        covered[k]++;
                    length_sum[k] += run.ci_upper[k] - run.ci_lower[k];
                    bias_sum[k] += run.estimate[k] - run.truth[k];
                }
            }
            if (n_failed > config.n_replicates / 20)
                throw std::runtime_error("run_monte_carlo: method " + method.id() + " at n=" +
                                         std::to_string(n) + " failed in " +
                                         std::to_string(n_failed) + "/" +
                                         std::to_string(config.n_replicates) +
                                         " replicates; first error: " + first_error);

            const std::vector<double>& truth = truth_for(n, method.eval_fraction());
            for (std::size_t k = 0; k < K; ++k) {
                CellStats cell;
                cell.method_id = method.id();
                cell.n = n;
                cell.group = static_cast<int>(k) + 1;
                cell.n_ok = n_ok;
                cell.n_failed = n_failed;
                cell.coverage = n_ok > 0 ? static_cast<double>(covered[k]) / n_ok : 0.0;
                cell.avg_ci_length = n_ok > 0 ? length_sum[k] / n_ok : 0.0;
                cell.bias = n_ok > 0 ? bias_sum[k] / n_ok : 0.0;
                cell.truth = truth[k];
                report.cells.push_back(cell);
            }
            MethodTiming timing;
            timing.method_id = method.id();
            timing.n = n;
            timing.mean_cpu_seconds = n_ok > 0 ? cpu_total / n_ok : 0.0;
            report.timings.push_back(timing);
        }
    }
    return report;
}

} // namespace splitgates
