#pragma once

// Regret, its three-term decomposition, convergence integrals and episode
// statistics, all recomputed from a RunRecord and the instance.

#include "tsgame/simulator.hpp"

#include <span>
#include <vector>

namespace tsgame {

/// sqrt(t log t) with t clamped to at least e.
double regret_normalizer(double t);

/// Normalized series are NaN before this time.
inline constexpr double kNormalizedFrom = 3.0;

Vec time_grid(const RunRecord& rec);

/// Per-step increments recomputed from states and controls.
Vec regret_increments(const PlayerTrace& trace, const GameSpec& spec, const EquilibriumSolution& eq_true, double dt);

/// Running sum with a leading zero (length steps + 1).
Vec cumulative(const Vec& increments);

struct RegretSeries {
    Vec times;
    Vec cumulative;
    Vec normalized;      ///< R / sqrt(t log t)
    Vec dim_normalized;  ///< R / (d sqrt(t log t))
};

RegretSeries regret_series(const RunRecord& rec, const PlayerTrace& trace, const GameSpec& spec,
                           const EquilibriumSolution& eq_true);

/// Cumulative decomposition terms (length steps + 1). The per-segment
/// (lambda_k, Lambda_k, rho_k) solve player i's problem under A_hat_k against
/// the true stationary opponents (see best_response).
///   r0: sampling error, integral of lambda_k - lambda(A)
///   r1: v_{k(0)}(X_0) - v_{k(t)}(X_t), v_k(x) = x^T Lambda_k x / 2 + rho_k^T x
///   r2: model mismatch, integral of (Lambda_k X + rho_k)^T (A - A_hat_k) X
///   switch_jumps: sum over switches s of v_k(X_s) - v_{k+1}(X_s), the part
///                 of the telescoped value change that r1 leaves out
struct Decomposition {
    Vec r0;
    Vec r1;
    Vec r2;
    Vec switch_jumps;

    Vec sum() const { return r0 + r1 + r2; }
};

Decomposition decompose_regret(const RunRecord& rec, const PlayerTrace& trace, const GameSpec& spec,
                               const EquilibriumSolution& eq_true);

struct ConvergenceSeries {
    Vec param_err;   ///< integral of ||A - A_hat_k(s)||_F^2
    Vec state_err;   ///< integral of ||X_hat - X||^2 (empty without coupling)
    Vec policy_err;  ///< integral of ||alpha_hat - a(X; A)||^2 (empty without coupling)
};

ConvergenceSeries convergence_series(const RunRecord& rec, const PlayerTrace& trace, const GameSpec& spec,
                                     const EquilibriumSolution& eq_true);

struct Band {
    Vec mean;
    Vec std;  ///< population standard deviation
    Vec lower;
    Vec upper;
};

/// Pointwise mean and scale * std envelope; throws on misaligned series.
Band aggregate(std::span<const Vec> series, double band_scale = 0.2);

/// Episodes started in [0, t] (the initial episode counts).
std::size_t episode_count(const PlayerTrace& trace, double t, double dt);

/// max_{s <= t} ||X_hat_s||
double max_state_norm(const PlayerTrace& trace, double t, double dt);

/// Index of the grid point closest to t.
std::size_t step_at(double t, double dt);

}  // namespace tsgame
