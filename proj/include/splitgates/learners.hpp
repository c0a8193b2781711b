#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "splitgates/dataset.hpp"
#include "splitgates/lasso.hpp"
#include "splitgates/rng.hpp"

namespace splitgates {

struct FixedLambda {
    double lambda;
};

struct CvLambda {
    int k_folds = 5;
};

using LambdaRule = std::variant<FixedLambda, CvLambda>;

inline std::string lambda_rule_id(const LambdaRule& rule) {
    if (const auto* f = std::get_if<FixedLambda>(&rule))
        return "fixed" + std::to_string(f->lambda);
    return "cv" + std::to_string(std::get<CvLambda>(rule).k_folds);
}

// One fitted linear predictor: [intercept, slopes...] on the original scale,
// plus the training standardization for provenance. Pure function after fit.
struct LinearModel {
    Eigen::VectorXd coef;
    Standardization standardization;
    double lambda = 0.0;

    double predict(const Eigen::RowVectorXd& z) const {
        return coef(0) + z * coef.tail(coef.size() - 1);
    }

    Eigen::VectorXd predict_all(const Eigen::MatrixXd& z) const {
        return (z * coef.tail(coef.size() - 1)).array() + coef(0);
    }
};

namespace detail {

inline LinearModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const LambdaRule& rule, std::uint64_t seed) {
    LinearModel model;
    if (const auto* fixed = std::get_if<FixedLambda>(&rule)) {
        model.coef = lasso_fit(x, y, fixed->lambda);
        model.lambda = fixed->lambda;
        model.standardization = splitgates::detail::standardize(x, y).std;
    } else {
        const auto cv = cv_lasso(x, y, std::get<CvLambda>(rule).k_folds, seed);
        model.coef = cv.coef;
        model.lambda = cv.lambda;
        model.standardization = cv.standardization;
    }
    return model;
}

inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
    return out;
}

inline Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    return out;
}

} // namespace detail

// T-learner CATE proxy: separate lasso fits per arm; the proxy score is the
// difference of the arm predictions. The score only ranks units, so it does
// not need to estimate the CATE well for downstream inference to be valid.
struct ScoreModel {
    LinearModel treated;
    LinearModel control;
    std::string learner_id;

    double score(const Eigen::RowVectorXd& z) const {
        return treated.predict(z) - control.predict(z);
    }

    Eigen::VectorXd score_all(const Eigen::MatrixXd& z) const {
        return treated.predict_all(z) - control.predict_all(z);
    }
};

// Control-arm outcome model used for SSRI baseline adjustment.
struct BaselineModel {
    LinearModel model;

    double predict(const Eigen::RowVectorXd& z) const { return model.predict(z); }
    Eigen::VectorXd predict_all(const Eigen::MatrixXd& z) const {
        return model.predict_all(z);
    }
};

inline ScoreModel fit_proxy(const ExperimentDataset& train, const LambdaRule& rule,
                            std::uint64_t seed = 0) {
    const auto rows1 = train.arm_rows(1);
    const auto rows0 = train.arm_rows(0);
    if (rows1.size() < 2)
        throw std::invalid_argument("fit_proxy: treated arm has fewer than 2 units");
    if (rows0.size() < 2)
        throw std::invalid_argument("fit_proxy: control arm has fewer than 2 units");

    ScoreModel model;
    model.treated = detail::fit_linear(detail::gather_rows(train.z, rows1),
                                       detail::gather(train.y, rows1), rule,
                                       derive_seed(seed, 1));
    model.control = detail::fit_linear(detail::gather_rows(train.z, rows0),
                                       detail::gather(train.y, rows0), rule,
                                       derive_seed(seed, 0));
    model.learner_id = "t_lasso_" + lambda_rule_id(rule);
    return model;
}

// Lasso of Y on Z among control units only, with CV-selected lambda.
inline BaselineModel fit_baseline(const ExperimentDataset& train, std::uint64_t seed = 0,
                                  int cv_folds = 5) {
    const auto rows0 = train.arm_rows(0);
    if (rows0.size() < 2)
        throw std::invalid_argument("fit_baseline: control arm has fewer than 2 units");
    BaselineModel model;
    model.model = detail::fit_linear(detail::gather_rows(train.z, rows0),
                                     detail::gather(train.y, rows0),
                                     CvLambda{cv_folds}, derive_seed(seed, 2));
    return model;
}

} // namespace splitgates
