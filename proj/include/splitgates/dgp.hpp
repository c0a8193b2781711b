#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "splitgates/dataset.hpp"
#include "splitgates/rng.hpp"

namespace splitgates {

// Synthetic treatment-effect models spanning linear, polynomial, and
// step-change heterogeneity, plus a zero-effect null. Covariates are i.i.d.
// standard normal; all kinds share the baseline surface
//   b(z) = z1 + 0.7 z3 + 0.5 z4^2.
enum class DgpKind { Zero, Linear, Polynomial, StepChange };

inline std::string to_string(DgpKind kind) {
    switch (kind) {
        case DgpKind::Zero: return "zero";
        case DgpKind::Linear: return "linear";
        case DgpKind::Polynomial: return "polynomial";
        case DgpKind::StepChange: return "step_change";
    }
    return "unknown";
}

inline DgpKind dgp_kind_from_string(const std::string& s) {
    if (s == "zero") return DgpKind::Zero;
    if (s == "linear") return DgpKind::Linear;
    if (s == "polynomial") return DgpKind::Polynomial;
    if (s == "step_change") return DgpKind::StepChange;
    throw std::invalid_argument("unknown dgp kind '" + s + "'");
}

struct Dgp {
    DgpKind kind = DgpKind::Linear;
    int p = 10;
    double noise_sd = 1.0;
    double treat_prob = 0.5;

    double baseline(const Eigen::RowVectorXd& z) const {
        return z(0) + 0.7 * z(2) + 0.5 * z(3) * z(3);
    }

    double cate(const Eigen::RowVectorXd& z) const {
        switch (kind) {
            case DgpKind::Zero:
                return 0.0;
            case DgpKind::Linear:
                return 1.0 + z(0) - 0.5 * z(1);
            case DgpKind::Polynomial:
                return 0.5 * z(0) * z(0) + z(0) * z(1) - 0.5;
            case DgpKind::StepChange:
                return 2.0 * (z(0) > 0.5 ? 1.0 : 0.0) - (z(1) < -0.5 ? 1.0 : 0.0);
        }
        return 0.0;
    }
};

inline Dgp make_dgp(DgpKind kind) {
    Dgp dgp;
    dgp.kind = kind;
    return dgp;
}

// One simulated experiment plus its hidden potential-outcome information.
// Noise enters through Y(0) only, so Y(1) - Y(0) equals the CATE exactly.
struct GeneratedSample {
    ExperimentDataset data;
    Eigen::VectorXd cate_values; // Y(1) - Y(0) per unit
};

// Draw order is fixed (Z row by row, then noise, then treatment), so a seed
// pins the sample bit for bit.
inline GeneratedSample generate(const Dgp& dgp, int n, std::uint64_t seed) {
    if (n < 2)
        throw std::invalid_argument("generate: n must be at least 2");
    if (!(dgp.noise_sd > 0.0))
        throw std::invalid_argument("generate: noise_sd must be positive");
    if (!(dgp.treat_prob > 0.0 && dgp.treat_prob < 1.0))
        throw std::invalid_argument("generate: treat_prob must be in (0, 1)");

    auto rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    GeneratedSample sample;
    sample.data.z.resize(n, dgp.p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dgp.p; ++j) sample.data.z(i, j) = normal(rng);

    Eigen::VectorXd y0(n);
    sample.cate_values.resize(n);
    for (int i = 0; i < n; ++i) {
        y0(i) = dgp.baseline(sample.data.z.row(i)) + dgp.noise_sd * normal(rng);
        sample.cate_values(i) = dgp.cate(sample.data.z.row(i));
    }

    std::bernoulli_distribution treat(dgp.treat_prob);
    sample.data.d.resize(n);
    sample.data.y.resize(n);
    for (int i = 0; i < n; ++i) {
        const int d = treat(rng) ? 1 : 0;
        sample.data.d(i) = d;
        sample.data.y(i) = d == 1 ? y0(i) + sample.cate_values(i) : y0(i);
        sample.data.unit_ids.push_back(i);
    }
    return sample;
}

} // namespace splitgates
