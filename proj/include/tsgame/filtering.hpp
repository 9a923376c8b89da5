#pragma once

// Gaussian posterior over the row-stacked drift, maintained as an episode
// anchor plus running sufficient statistics.

#include "tsgame/game.hpp"

#include <span>
#include <utility>

namespace tsgame {

class FilterError : public std::runtime_error {
public:
    explicit FilterError(const std::string& what) : std::runtime_error(what) {}
};

struct FilterStep {
    Vec x;      ///< state at step start
    Vec dx;     ///< observed increment over the step
    Vec alpha;  ///< applied control
    double dt = 0;
};

struct PosteriorState {
    Vec mu;
    Mat sigma;
    Vec anchor_mu;
    Mat anchor_sigma;
    double anchor_logdet = 0;
    Mat gram;  ///< running sum of x x^T dt since the anchor
    Vec info;  ///< running sum of (I_d (x) x) (sigma sigma^T)^{-1} (dx + alpha dt)
    double logdet = 0;

    static PosteriorState from_prior(const Vec& mu0, const Mat& sigma0);

    std::size_t dim() const { return static_cast<std::size_t>(gram.rows()); }
};

/// (sigma sigma^T)^{-1}
Mat noise_precision(const Mat& sigma);

/// Pure update; see filter_update_inplace.
PosteriorState filter_update(const PosteriorState& state, const FilterStep& step, const GameSpec& spec,
                             std::size_t i);

/// Accumulates one left-endpoint step and recomputes (mu, Sigma) from the
/// anchor:  M = I + Sigma_a ((sigma sigma^T)^{-1} (x) G),
///          Sigma = M^{-1} Sigma_a,  mu = M^{-1} (mu_a + Sigma_a b).
/// Throws FilterError if Sigma loses positive definiteness.
void filter_update_inplace(PosteriorState& state, const FilterStep& step, const Mat& noise_prec);

/// Moves the anchor to the current (mu, Sigma) and clears the statistics.
PosteriorState reset_anchor(const PosteriorState& state);

/// det(Sigma_t) / det(Sigma_anchor) from log-determinants.
double det_ratio(const PosteriorState& state);

/// Batch conjugate regression on the same discretized data, in information
/// form with explicit observation matrices I_d (x) x^T. Test oracle.
std::pair<Vec, Mat> bayes_regression_oracle(const Vec& prior_mu, const Mat& prior_sigma,
                                            std::span<const FilterStep> steps, const GameSpec& spec,
                                            std::size_t i);

}  // namespace tsgame
