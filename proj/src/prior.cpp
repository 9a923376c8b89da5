#include "tsgame/prior.hpp"

#include <cmath>
#include <stdexcept>

namespace tsgame {

PriorKind parse_prior_kind(const std::string& name) {
    if (name == "gaussian") return PriorKind::Gaussian;
    if (name == "student_t") return PriorKind::StudentT;
    if (name == "exponential") return PriorKind::Exponential;
    if (name == "beta") return PriorKind::Beta;
    throw std::invalid_argument("unknown prior family '" + name + "'");
}

std::string to_string(PriorKind kind) {
    switch (kind) {
        case PriorKind::Gaussian: return "gaussian";
        case PriorKind::StudentT: return "student_t";
        case PriorKind::Exponential: return "exponential";
        case PriorKind::Beta: return "beta";
    }
    return "gaussian";
}

PriorSampler::PriorSampler(PriorFamily family, Vec mean, Mat cov)
    : family_(family), mean_(std::move(mean)), cov_(symmetrize(cov)) {
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
        throw std::invalid_argument("PriorSampler: covariance does not match mean");
    }
    Eigen::LLT<Mat> llt(cov_);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("PriorSampler: covariance is not positive definite");
    }
    chol_ = llt.matrixL();
    if (family_.kind == PriorKind::StudentT && !(family_.dof > 2.0)) {
        throw std::invalid_argument("PriorSampler: student_t needs dof > 2 for a finite variance");
    }
    if (family_.kind == PriorKind::Beta && !(family_.beta_a > 0.0 && family_.beta_b > 0.0)) {
        throw std::invalid_argument("PriorSampler: beta shapes must be positive");
    }
}

Vec PriorSampler::sample(Rng& rng) const {
    const Eigen::Index n = mean_.size();
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec out(n);
    switch (family_.kind) {
        case PriorKind::Gaussian: {
            Vec z(n);
            for (Eigen::Index k = 0; k < n; ++k) z(k) = normal(rng);
            out = mean_ + chol_ * z;
            break;
        }
        case PriorKind::StudentT: {
            // mean + L z sqrt((nu - 2) / chi2_nu) has covariance L L^T
            Vec z(n);
            for (Eigen::Index k = 0; k < n; ++k) z(k) = normal(rng);
            std::chi_squared_distribution<double> chi2(family_.dof);
            const double w = std::sqrt((family_.dof - 2.0) / chi2(rng));
            out = mean_ + chol_ * z * w;
            break;
        }
        case PriorKind::Exponential: {
            // shifted exponential: sd = 1 / rate, mean = loc + sd
            std::exponential_distribution<double> expo(1.0);
            for (Eigen::Index k = 0; k < n; ++k) {
                const double sd = std::sqrt(cov_(k, k));
                out(k) = mean_(k) - sd + sd * expo(rng);
            }
            break;
        }
        case PriorKind::Beta: {
            const double a = family_.beta_a;
            const double b = family_.beta_b;
            const double m = a / (a + b);
            const double v = a * b / ((a + b) * (a + b) * (a + b + 1.0));
            std::gamma_distribution<double> ga(a, 1.0);
            std::gamma_distribution<double> gb(b, 1.0);
            for (Eigen::Index k = 0; k < n; ++k) {
                const double x = ga(rng);
                const double y = gb(rng);
                const double u = x / (x + y);
                const double scale = std::sqrt(cov_(k, k) / v);
                out(k) = mean_(k) + scale * (u - m);
            }
            break;
        }
    }
    return out;
}

}  // namespace tsgame
