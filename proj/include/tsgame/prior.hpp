#pragma once

// Prior families for the initial drift draw, moment-matched to a target
// mean vector and covariance.

#include "tsgame/linalg.hpp"
#include "tsgame/rng.hpp"

#include <string>

namespace tsgame {

enum class PriorKind { Gaussian, StudentT, Exponential, Beta };

PriorKind parse_prior_kind(const std::string& name);
std::string to_string(PriorKind kind);

struct PriorFamily {
    PriorKind kind = PriorKind::Gaussian;
    double dof = 3.0;        ///< Student-t degrees of freedom, must exceed 2
    double beta_a = 2.0;     ///< Beta shape parameters of the location-scale beta
    double beta_b = 5.0;
    bool truncated = true;
};

/// Moment-matched sampler. Gaussian and Student-t are multivariate with
/// covariance `cov`; exponential and beta are elementwise location-scale
/// families matching mean(k) and cov(k, k).
class PriorSampler {
public:
    PriorSampler(PriorFamily family, Vec mean, Mat cov);

    Vec sample(Rng& rng) const;
    const PriorFamily& family() const { return family_; }
    const Vec& mean() const { return mean_; }
    const Mat& cov() const { return cov_; }

private:
    PriorFamily family_;
    Vec mean_;
    Mat cov_;
    Mat chol_;
};

}  // namespace tsgame
