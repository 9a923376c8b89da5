#pragma once

// Analytic checks shared by the validate suite and the acceptance runner.

#include "tsgame/game.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tsgame {

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Random valid instance of player 0's Riccati data, d in [1, max_dim].
struct RiccatiCase {
    Mat a, varsigma, r, q_ii;
};
RiccatiCase random_riccati_case(std::mt19937_64& rng, std::size_t max_dim);

/// Worst relative residual over `count` random instances.
Check check_riccati_residuals(std::size_t count, std::uint64_t seed, std::size_t max_dim = 8);

/// Closed-form symmetric solution against the general solver.
Check check_symmetric_closed_form();

/// Scalar instance: lambda == 0.25 from the closed form.
Check check_scalar_value();

/// Continuous-update posterior against batch regression, with one anchor
/// reset halfway through each trajectory.
Check check_filter_oracle(std::size_t trajectories, std::uint64_t seed, std::size_t max_dim = 3);

/// Lyapunov solution with F = -varsigma Upsilon, C = sigma sigma^T equals
/// Upsilon^{-1} on the symmetric example.
Check check_lyapunov_stationary();

/// lambda from the closed form against the closed-form stationary expected
/// cost, every player of `spec`.
Check check_value_consistency(const GameSpec& spec);

/// Assumption list and the positive-definiteness condition on the spec.
Check check_spec_assumptions(const GameSpec& spec);

std::vector<Check> validation_battery(const GameSpec& spec, std::uint64_t seed);

}  // namespace tsgame
