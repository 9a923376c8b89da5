#pragma once

// Seeded Euler-Maruyama simulation of the N-player system under per-player
// policies, with an optional coupled full-information copy driven by the
// same Brownian increments.

#include "tsgame/ts_controller.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tsgame {

enum class PolicyKind { TS, Oracle, CE, Blind };

std::string to_string(PolicyKind kind);
PolicyKind parse_policy_kind(const std::string& name);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::TS;
    double ce_cadence = 1.0;                 ///< CE gain recompute period (time units)
    PriorFamily prior;                       ///< non-Gaussian kinds replace the episode-0 draw (TS, Blind)
    std::optional<Mat> forced_drift;         ///< TS: play this drift in every episode
};

struct SimConfig {
    double dt = 0.05;
    std::size_t steps = 5000;
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    std::size_t record_every = 1;      ///< CSV thinning only; records keep every step
    std::vector<std::size_t> players;  ///< players to simulate and record; empty = all
    std::size_t threads = 1;
    double abort_norm = 1e6;
    bool record_posterior_mean = false;

    double horizon() const { return dt * static_cast<double>(steps); }
};

/// Interval of constant drift estimate (an episode for TS and Blind, a
/// recompute segment for CE, the whole run for Oracle).
struct Segment {
    std::size_t start_step = 0;
    Mat a_hat;
    EpisodeEnd reason = EpisodeEnd::None;  ///< rule that opened this segment (TS)
    int rejects = 0;
    bool fallback = false;
};

struct PlayerTrace {
    std::size_t player = 0;
    PolicyKind kind = PolicyKind::TS;
    Mat states;          ///< d x (steps + 1)
    Mat controls;        ///< d x steps, control applied over [t_n, t_{n+1})
    Mat oracle_states;   ///< d x (steps + 1) when coupling is enabled, else empty
    Vec regret_increments;  ///< steps
    std::vector<Segment> segments;
    Vec det_ratio;       ///< steps + 1 (ones for policies without a posterior)
    Vec trace_sigma;     ///< steps + 1
    Mat posterior_mean;  ///< d^2 x (steps + 1) when SimConfig::record_posterior_mean, else empty
    Vec final_posterior_mean;
    std::vector<int> macro_boundaries;
    int ce_failures = 0;

    bool coupled() const { return oracle_states.cols() > 0; }
};

struct RunRecord {
    double dt = 0;
    std::size_t steps = 0;
    std::size_t path = 0;
    std::uint64_t seed = 0;
    bool aborted = false;
    std::size_t abort_step = 0;
    std::string abort_reason;
    std::vector<PlayerTrace> players;

    double time(std::size_t n) const { return dt * static_cast<double>(n); }
    const PlayerTrace& trace_for(std::size_t player) const;
};

/// x' = x + (A x - alpha) dt + sigma dW
Vec step_dynamics(const Vec& x, const Vec& alpha, const Mat& a, const Mat& sigma, double dt, const Vec& dw);

/// Per-player controller used inside a run.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Vec act(const Vec& x) const = 0;
    /// `step_index` is the index n of the step that just ended at t_{n+1}.
    virtual void observe(const FilterStep& step, std::size_t step_index, double now, double grid_tol) = 0;
    virtual const PosteriorState* posterior() const { return nullptr; }
    virtual const std::vector<Segment>& segments() const = 0;
    virtual std::vector<int> macro_boundaries() const { return {}; }
    virtual int failures() const { return 0; }
};

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg, const GameSpec& spec, const EquilibriumSolution& eq_true,
                                    std::size_t player, Rng sampling_rng);

/// Certainty-equivalent gains from the projected posterior mean.
/// Returns nullopt when the equilibrium for that drift does not exist.
std::optional<EpisodeState> ce_gains(const PosteriorState& posterior, const GameSpec& spec, std::size_t i);

/// Certainty-equivalent control at x from the current posterior mean.
Vec ce_control(const PosteriorState& posterior, const GameSpec& spec, std::size_t i, const Vec& x);

/// One seeded path against a precomputed true-drift equilibrium.
RunRecord run_game(const GameSpec& spec, const EquilibriumSolution& eq_true, const std::vector<PolicyConfig>& policies,
                   const SimConfig& cfg, bool couple_oracle, std::size_t path_index);

/// One seeded path. `policies` has one entry per player (or a single entry
/// applied to every player).
RunRecord run_game(const GameSpec& spec, const std::vector<PolicyConfig>& policies, const SimConfig& cfg,
                   bool couple_oracle, std::size_t path_index);

/// Paths 0..n_paths-1 on cfg.threads workers; output order is path order.
std::vector<RunRecord> run_paths(const GameSpec& spec, const std::vector<PolicyConfig>& policies,
                                 const SimConfig& cfg, bool couple_oracle);

}  // namespace tsgame
