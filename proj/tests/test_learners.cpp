#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "splitgates/dgp.hpp"
#include "splitgates/learners.hpp"
#include "splitgates/rng.hpp"

using namespace splitgates;

namespace {

ExperimentDataset signal_dataset(int n, int p, std::uint64_t seed) {
    // Y = 2 D z1 + noise: the CATE is exactly 2 z1.
    auto rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    ExperimentDataset data;
    data.y.resize(n);
    data.d.resize(n);
    data.z.resize(n, p);
    data.unit_ids.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) data.z(i, j) = normal(rng);
        data.d(i) = coin(rng) ? 1 : 0;
        data.y(i) = 2.0 * data.d(i) * data.z(i, 0) + 0.5 * normal(rng);
        data.unit_ids[static_cast<std::size_t>(i)] = i;
    }
    return data;
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ac = a.array() - a.mean();
    const Eigen::VectorXd bc = b.array() - b.mean();
    return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

} // namespace

TEST_CASE("proxy recovers a strong linear signal", "[learners]") {
    const auto train = signal_dataset(500, 5, 42);
    const auto model = fit_proxy(train, CvLambda{5}, 1);
    CHECK(model.learner_id == "t_lasso_cv5");

    const auto fresh = signal_dataset(400, 5, 77);
    const Eigen::VectorXd scores = model.score_all(fresh.z);
    const Eigen::VectorXd target = 2.0 * fresh.z.col(0);
    CHECK(correlation(scores, target) > 0.8);
}

TEST_CASE("identical arms give a zero score", "[learners]") {
    auto rng = make_rng(90);
    std::normal_distribution<double> normal(0.0, 1.0);
    ExperimentDataset data;
    const int n = 60;
    data.y.resize(n);
    data.d.resize(n);
    data.z.resize(n, 3);
    data.unit_ids.resize(n);
    // Mirrored arms: unit pairs share y and z, differing only in d, so both
    // arm fits see the same regression problem.
    for (int i = 0; i < n; i += 2) {
        for (int j = 0; j < 3; ++j) data.z(i, j) = normal(rng);
        data.z.row(i + 1) = data.z.row(i);
        const double y = normal(rng);
        data.y(i) = y;
        data.y(i + 1) = y;
        data.d(i) = 1;
        data.d(i + 1) = 0;
        data.unit_ids[static_cast<std::size_t>(i)] = i;
        data.unit_ids[static_cast<std::size_t>(i + 1)] = i + 1;
    }
    const auto model = fit_proxy(data, FixedLambda{0.3}, 5);
    for (int i = 0; i < n; ++i)
        CHECK(model.score(data.z.row(i)) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("unpenalized univariate proxy matches arm-wise least squares", "[learners]") {
    auto rng = make_rng(91);
    std::normal_distribution<double> normal(0.0, 1.0);
    ExperimentDataset data;
    const int n = 80;
    data.y.resize(n);
    data.d.resize(n);
    data.z.resize(n, 1);
    data.unit_ids.resize(n);
    for (int i = 0; i < n; ++i) {
        data.z(i, 0) = normal(rng);
        data.d(i) = i % 2;
        data.y(i) = data.d(i) ? 1.0 + 2.0 * data.z(i, 0) + 0.1 * normal(rng)
                              : 0.5 - 1.0 * data.z(i, 0) + 0.1 * normal(rng);
        data.unit_ids[static_cast<std::size_t>(i)] = i;
    }
    const auto model = fit_proxy(data, FixedLambda{0.0}, 0);

    // Arm-wise normal equations oracle.
    auto ols = [&](int arm) {
        const auto rows = data.arm_rows(arm);
        Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), 2);
        Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            design(static_cast<Eigen::Index>(i), 0) = 1.0;
            design(static_cast<Eigen::Index>(i), 1) = data.z(rows[i], 0);
            y(static_cast<Eigen::Index>(i)) = data.y(rows[i]);
        }
        return Eigen::VectorXd(
            (design.transpose() * design).ldlt().solve(design.transpose() * y));
    };
    const Eigen::VectorXd b1 = ols(1), b0 = ols(0);
    for (double z : {-1.5, -0.2, 0.0, 0.7, 2.1}) {
        Eigen::RowVectorXd row(1);
        row << z;
        const double oracle = (b1(0) + b1(1) * z) - (b0(0) + b0(1) * z);
        CHECK(model.score(row) == Catch::Approx(oracle).margin(1e-6));
    }
}

TEST_CASE("proxy requires two units per arm", "[learners]") {
    auto data = signal_dataset(30, 2, 3);
    for (int i = 0; i < 30; ++i) data.d(i) = i == 0 ? 1 : 0;
    CHECK_THROWS(fit_proxy(data, FixedLambda{0.1}, 0));
}

TEST_CASE("fitted models are pure functions", "[learners]") {
    const auto train = signal_dataset(200, 4, 8);
    const auto model = fit_proxy(train, CvLambda{5}, 2);
    Eigen::RowVectorXd z(4);
    z << 0.3, -1.0, 0.2, 0.9;
    const double first = model.score(z);
    for (int rep = 0; rep < 5; ++rep) CHECK(model.score(z) == first);
}

TEST_CASE("baseline on constant control outcomes predicts the constant", "[learners]") {
    auto data = signal_dataset(50, 3, 10);
    for (int i = 0; i < 50; ++i)
        if (data.d(i) == 0) data.y(i) = 4.25;
    const auto baseline = fit_baseline(data, 0);
    Eigen::RowVectorXd z(3);
    z << 1.0, -2.0, 0.5;
    CHECK(baseline.predict(z) == Catch::Approx(4.25).margin(1e-9));
}

TEST_CASE("baseline shrinks pure-noise slopes", "[learners]") {
    auto rng = make_rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto data = signal_dataset(300, 5, 12);
    for (int i = 0; i < 300; ++i) data.y(i) = normal(rng); // outcome unrelated to z
    const auto baseline = fit_baseline(data, 4);
    CHECK(baseline.model.coef.tail(5).cwiseAbs().maxCoeff() < 0.15);
}

TEST_CASE("baseline beats the sample mean on a linear control surface", "[learners]") {
    auto rng = make_rng(13);
    std::normal_distribution<double> normal(0.0, 1.0);
    ExperimentDataset data;
    const int n = 500;
    data.y.resize(n);
    data.d.resize(n);
    data.z.resize(n, 4);
    data.unit_ids.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 4; ++j) data.z(i, j) = normal(rng);
        data.d(i) = i % 2;
        data.y(i) = 1.0 + 1.5 * data.z(i, 0) - 0.8 * data.z(i, 2) + 0.5 * normal(rng);
        data.unit_ids[static_cast<std::size_t>(i)] = i;
    }
    const auto baseline = fit_baseline(data, 21);

    double sse_model = 0.0, sse_mean = 0.0;
    double mean_y = 0.0;
    int n_eval = 0;
    Eigen::MatrixXd fresh_z(200, 4);
    Eigen::VectorXd fresh_y(200);
    for (int i = 0; i < 200; ++i) {
        for (int j = 0; j < 4; ++j) fresh_z(i, j) = normal(rng);
        fresh_y(i) = 1.0 + 1.5 * fresh_z(i, 0) - 0.8 * fresh_z(i, 2) + 0.5 * normal(rng);
        mean_y += fresh_y(i);
        ++n_eval;
    }
    mean_y /= n_eval;
    const Eigen::VectorXd pred = baseline.predict_all(fresh_z);
    for (int i = 0; i < 200; ++i) {
        sse_model += (fresh_y(i) - pred(i)) * (fresh_y(i) - pred(i));
        sse_mean += (fresh_y(i) - mean_y) * (fresh_y(i) - mean_y);
    }
    CHECK(sse_model < sse_mean);
}

TEST_CASE("baseline requires two control units", "[learners]") {
    auto data = signal_dataset(20, 2, 14);
    for (int i = 0; i < 20; ++i) data.d(i) = i == 0 ? 0 : 1;
    CHECK_THROWS(fit_baseline(data, 0));
}

TEST_CASE("proxy seed determinism", "[learners]") {
    const auto train = signal_dataset(150, 4, 55);
    const auto a = fit_proxy(train, CvLambda{5}, 9);
    const auto b = fit_proxy(train, CvLambda{5}, 9);
    CHECK((a.treated.coef - b.treated.coef).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.control.coef - b.control.coef).cwiseAbs().maxCoeff() == 0.0);
}
