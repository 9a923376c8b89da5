#pragma once

// Episodic Thompson-sampling policy: truncated posterior draws at episode
// starts, the two-part stopping rule and per-episode affine feedback.

#include "tsgame/filtering.hpp"
#include "tsgame/prior.hpp"
#include "tsgame/rng.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace tsgame {

struct EpisodeState {
    int k = 0;
    double t_k = 0;
    double t_prev = 0;  ///< length of the previous episode (0 before the first switch)
    Mat a_hat;
    Mat upsilon_k;
    Vec eta_k;
    Mat gain_k;  ///< varsigma Upsilon_k + A_hat
    Vec gain_b;  ///< varsigma Upsilon_k eta_k
    int rejects = 0;
    bool fallback = false;
};

struct MacroEpisodeLog {
    std::vector<int> boundaries;  ///< episode indices whose start was triggered by the determinant rule
};

/// Result of a truncated draw.
struct SampleResult {
    Mat a_hat;
    EquilibriumSolution eq;
    int rejects = 0;
    bool fallback = false;
};

/// Membership surrogate for the truncation set: ||A_hat||_F <= M_A,
/// abscissa(reference - A_hat - varsigma Upsilon(A_hat)) <= -c and
/// abscissa(-varsigma Upsilon(A_hat)) <= -c / 2.
bool in_truncation_set(const Mat& a_hat, const Mat& reference, const Mat& upsilon, const GameSpec& spec,
                       std::size_t i);

using DrawFn = std::function<Vec(Rng&)>;

/// Rejection sampler shared by posterior and prior draws. `reference` stands
/// in for the unknown true drift; falls back to the norm-projected
/// `fallback_mean` after max_rejects rejections.
SampleResult sample_truncated(const DrawFn& draw, const Mat& reference, const Vec& fallback_mean,
                              const GameSpec& spec, std::size_t i, Rng& rng);

/// Draw from N(mu_t, Sigma_t) restricted to the truncation set.
SampleResult sample_parameter(const PosteriorState& posterior, const GameSpec& spec, std::size_t i, Rng& rng);

enum class EpisodeEnd { None, Determinant, Length };

/// Which rule (if any) ends the current episode at time `now`. `grid_tol`
/// absorbs floating-point drift of the time grid (half a step).
EpisodeEnd episode_end_reason(double now, const EpisodeState& es, double det_ratio, double grid_tol = 0.0);

bool should_end_episode(double now, const EpisodeState& es, double det_ratio, double grid_tol = 0.0);

/// Builds the episode state from an accepted sample.
EpisodeState make_episode(const SampleResult& sample, const GameSpec& spec, std::size_t i, int k, double now,
                          double t_prev);

/// Starts a new episode at `now`: samples, derives the gains and resets the
/// posterior anchor. `prev` empty means the initial call at t = 0.
EpisodeState start_episode(PosteriorState& posterior, const GameSpec& spec, std::size_t i, double now,
                           const std::optional<EpisodeState>& prev, Rng& rng);

/// (varsigma Upsilon_k + A_hat) x - varsigma Upsilon_k eta_k
inline Vec control(const EpisodeState& es, const Vec& x) { return es.gain_k * x - es.gain_b; }

/// Stateful wrapper holding one player's posterior, episode and logs.
class ThompsonSampler {
public:
    /// `initial` replaces the Gaussian prior for the episode-0 draw only.
    ThompsonSampler(const GameSpec& spec, std::size_t player, Rng rng,
                    std::optional<PriorSampler> initial = std::nullopt);

    Vec act(const Vec& x) const { return control(episode_, x); }

    /// Feeds one step ending at `now`; rotates the episode if a rule fires.
    EpisodeEnd observe(const FilterStep& step, double now, double grid_tol);

    const PosteriorState& posterior() const { return posterior_; }
    const EpisodeState& episode() const { return episode_; }
    const std::vector<EpisodeState>& history() const { return history_; }
    const MacroEpisodeLog& macro_log() const { return macro_; }

    /// Replaces the sampled drift by a fixed matrix for every episode
    /// (used to check the coupling and decomposition identities).
    void force_parameter(const Mat& a_hat);

private:
    void adopt(EpisodeState es);

    const GameSpec* spec_;
    std::size_t player_;
    Rng rng_;
    Mat noise_prec_;
    PosteriorState posterior_;
    EpisodeState episode_;
    std::vector<EpisodeState> history_;
    MacroEpisodeLog macro_;
    std::optional<Mat> forced_;
};

}  // namespace tsgame
