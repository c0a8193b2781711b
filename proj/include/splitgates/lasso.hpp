#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "splitgates/rng.hpp"

namespace splitgates {

inline constexpr double kLassoTol = 1e-7;
inline constexpr int kLassoMaxSweeps = 10000;

// max(|z| - lambda, 0) * sign(z)
inline double soft_threshold(double z, double lambda) {
    const double a = std::fabs(z) - lambda;
    return a > 0.0 ? std::copysign(a, z) : 0.0;
}

// Per-column centering/scaling of the training covariates. A scale of zero
// marks a zero-variance column; its coefficient is pinned to 0.
struct Standardization {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;
};

struct LassoDiagnostics {
    std::vector<double> objective; // penalized objective after each sweep
    int sweeps = 0;
    bool converged = false;
};

namespace detail {

// Columns standardized to mean 0, population variance 1, so each coordinate
// update is a plain soft-threshold step.
struct StandardizedProblem {
    Eigen::MatrixXd xs;
    Eigen::VectorXd yc;
    double y_mean = 0.0;
    Standardization std;
    Eigen::Index m = 0;
    Eigen::Index p = 0;
};

inline StandardizedProblem standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size())
        throw std::invalid_argument("lasso: x and y row counts differ");
    if (x.rows() < 1)
        throw std::invalid_argument("lasso: need at least one row");
    if (!x.allFinite() || !y.allFinite())
        throw std::invalid_argument("lasso: non-finite input");

    StandardizedProblem prob;
    prob.m = x.rows();
    prob.p = x.cols();
    prob.y_mean = y.mean();
    prob.yc = y.array() - prob.y_mean;
    prob.std.mean = x.colwise().mean();
    prob.std.scale.resize(prob.p);
    prob.xs.resize(prob.m, prob.p);
    const double inv_m = 1.0 / static_cast<double>(prob.m);
    for (Eigen::Index j = 0; j < prob.p; ++j) {
        Eigen::VectorXd c = x.col(j).array() - prob.std.mean(j);
        const double var = c.squaredNorm() * inv_m;
        const double sd = std::sqrt(var);
        if (sd < 1e-12) {
            prob.std.scale(j) = 0.0;
            prob.xs.col(j).setZero();
        } else {
            prob.std.scale(j) = sd;
            prob.xs.col(j) = c / sd;
        }
    }
    return prob;
}

// Accumulated exactly like the descent's correlation so that a fit at
// lambda == lambda_max lands on identically zero slopes.
inline double lambda_max_of(const StandardizedProblem& prob) {
    const double inv_m = 1.0 / static_cast<double>(prob.m);
    double lam = 0.0;
    for (Eigen::Index j = 0; j < prob.p; ++j)
        lam = std::max(lam, std::fabs(prob.xs.col(j).dot(prob.yc) * inv_m));
    return lam;
}

// Cyclic coordinate descent at a single lambda, warm-started from beta.
// The residual r = yc - xs * beta is maintained incrementally.
inline void coordinate_descent(const StandardizedProblem& prob, double lambda,
                               Eigen::VectorXd& beta, Eigen::VectorXd& r,
                               LassoDiagnostics* diag = nullptr) {
    const double inv_m = 1.0 / static_cast<double>(prob.m);
    if (diag) {
        diag->objective.clear();
        diag->sweeps = 0;
        diag->converged = false;
    }
    for (int sweep = 0; sweep < kLassoMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < prob.p; ++j) {
            if (prob.std.scale(j) == 0.0) continue;
            const double b_old = beta(j);
            const double z = prob.xs.col(j).dot(r) * inv_m + b_old;
            const double b_new = soft_threshold(z, lambda);
            if (b_new != b_old) {
                r.noalias() -= (b_new - b_old) * prob.xs.col(j);
                beta(j) = b_new;
                max_change = std::max(max_change, std::fabs(b_new - b_old));
            }
        }
        if (diag) {
            diag->sweeps = sweep + 1;
            diag->objective.push_back(0.5 * inv_m * r.squaredNorm() +
                                      lambda * beta.cwiseAbs().sum());
        }
        if (max_change < kLassoTol) {
            if (diag) diag->converged = true;
            return;
        }
    }
}

inline Eigen::VectorXd to_original_scale(const StandardizedProblem& prob,
                                         const Eigen::VectorXd& beta) {
    Eigen::VectorXd coef(prob.p + 1);
    double intercept = prob.y_mean;
    for (Eigen::Index j = 0; j < prob.p; ++j) {
        const double slope =
            prob.std.scale(j) == 0.0 ? 0.0 : beta(j) / prob.std.scale(j);
        coef(j + 1) = slope;
        intercept -= slope * prob.std.mean(j);
    }
    coef(0) = intercept;
    return coef;
}

} // namespace detail

// Smallest lambda at which every slope is zero: max_j |x_j' (y - ybar)| / m
// on the standardized columns.
inline double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    return detail::lambda_max_of(detail::standardize(x, y));
}

// Minimizes (1/2m) ||y - b0 - X b||^2 + lambda ||b||_1 by cyclic coordinate
// descent on standardized columns; the intercept is unpenalized. Returns
// [intercept, slopes...] on the original scale.
inline Eigen::VectorXd lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 double lambda, LassoDiagnostics* diag = nullptr) {
    if (lambda < 0.0)
        throw std::invalid_argument("lasso: lambda must be nonnegative");
    auto prob = detail::standardize(x, y);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(prob.p);
    Eigen::VectorXd r = prob.yc;
    detail::coordinate_descent(prob, lambda, beta, r, diag);
    return detail::to_original_scale(prob, beta);
}

// Decreasing lambda grid: n_points log-spaced from lambda_max down to
// ratio * lambda_max.
inline std::vector<double> lasso_lambda_grid(double lambda_max, int n_points = 50,
                                             double ratio = 1e-3) {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n_points));
    if (n_points == 1) {
        grid.push_back(lambda_max);
        return grid;
    }
    const double log_max = std::log(lambda_max);
    const double log_min = std::log(lambda_max * ratio);
    for (int i = 0; i < n_points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n_points - 1);
        grid.push_back(std::exp(log_max + t * (log_min - log_max)));
    }
    return grid;
}

// Warm-started solution path over a decreasing grid; returns standardized
// slopes per grid point (column j = solution at lambdas[j]).
inline Eigen::MatrixXd lasso_path_standardized(const detail::StandardizedProblem& prob,
                                               const std::vector<double>& lambdas) {
    Eigen::MatrixXd path(prob.p, static_cast<Eigen::Index>(lambdas.size()));
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(prob.p);
    Eigen::VectorXd r = prob.yc;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        detail::coordinate_descent(prob, lambdas[i], beta, r);
        path.col(static_cast<Eigen::Index>(i)) = beta;
    }
    return path;
}

struct CvLassoResult {
    Eigen::VectorXd coef; // [intercept, slopes...], original scale
    double lambda = 0.0;
    std::vector<double> cv_mse; // mean held-out MSE per grid point
    std::vector<double> lambda_grid;
    Standardization standardization;
};

// k-fold cross-validated lasso over a 50-point log grid from lambda_max down
// to 1e-3 * lambda_max. Fold membership is a seeded random round-robin deal;
// ties in CV error resolve to the larger lambda.
inline CvLassoResult cv_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              int k_folds, std::uint64_t seed, int n_lambda = 50) {
    const Eigen::Index m = x.rows();
    if (k_folds < 2)
        throw std::invalid_argument("cv_lasso: need at least 2 folds");
    auto full = detail::standardize(x, y);
    const double lam_max = detail::lambda_max_of(full);

    CvLassoResult result;
    if (lam_max < 1e-300) {
        // No column carries signal at any lambda; intercept-only model.
        result.coef = Eigen::VectorXd::Zero(full.p + 1);
        result.coef(0) = full.y_mean;
        result.lambda = 0.0;
        result.standardization = full.std;
        return result;
    }
    result.lambda_grid = lasso_lambda_grid(lam_max, n_lambda);

    const int k = std::min<int>(k_folds, static_cast<int>(m));
    std::vector<int> fold_of(static_cast<std::size_t>(m));
    {
        std::vector<int> order(static_cast<std::size_t>(m));
        std::iota(order.begin(), order.end(), 0);
        auto rng = make_rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i = 0; i < order.size(); ++i)
            fold_of[static_cast<std::size_t>(order[i])] = static_cast<int>(i) % k;
    }

    std::vector<double> sse(result.lambda_grid.size(), 0.0);
    for (int f = 0; f < k; ++f) {
        std::vector<int> train_rows, test_rows;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (fold_of[static_cast<std::size_t>(i)] == f)
                test_rows.push_back(static_cast<int>(i));
            else
                train_rows.push_back(static_cast<int>(i));
        }
        if (train_rows.empty() || test_rows.empty()) continue;

        Eigen::MatrixXd xt(static_cast<Eigen::Index>(train_rows.size()), x.cols());
        Eigen::VectorXd yt(static_cast<Eigen::Index>(train_rows.size()));
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            xt.row(static_cast<Eigen::Index>(i)) = x.row(train_rows[i]);
            yt(static_cast<Eigen::Index>(i)) = y(train_rows[i]);
        }
        auto prob = detail::standardize(xt, yt);
        const Eigen::MatrixXd path = lasso_path_standardized(prob, result.lambda_grid);

        for (std::size_t li = 0; li < result.lambda_grid.size(); ++li) {
            const Eigen::VectorXd coef =
                detail::to_original_scale(prob, path.col(static_cast<Eigen::Index>(li)));
            for (int r : test_rows) {
                const double pred = coef(0) + x.row(r) * coef.tail(x.cols());
                const double e = y(r) - pred;
                sse[li] += e * e;
            }
        }
    }

    result.cv_mse.resize(sse.size());
    std::size_t best = 0;
    for (std::size_t li = 0; li < sse.size(); ++li) {
        result.cv_mse[li] = sse[li] / static_cast<double>(m);
        if (result.cv_mse[li] < result.cv_mse[best]) best = li;
    }
    result.lambda = result.lambda_grid[best];

    // Final fit on the full data, warm-started down the grid to best lambda.
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(full.p);
    Eigen::VectorXd r = full.yc;
    for (std::size_t li = 0; li <= best; ++li)
        detail::coordinate_descent(full, result.lambda_grid[li], beta, r);
    result.coef = detail::to_original_scale(full, beta);
    result.standardization = full.std;
    return result;
}

} // namespace splitgates
