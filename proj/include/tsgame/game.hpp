#pragma once

// Problem instance of the N-player ergodic LQ game and its full-information
// Nash solution (quadratic value functions, Gaussian stationary laws).

#include "tsgame/linalg.hpp"

#include <cstddef>
#include <random>
#include <string>
#include <vector>

namespace tsgame {

/// Support of the truncated prior / posterior over the drift.
struct TruncationSet {
    double max_norm = 5.0;      ///< bound M_A on ||A||_F
    double decay_margin = 0.1;  ///< decay rate c of the closed-loop matrix
    int max_rejects = 64;
    bool enabled = true;        ///< false disables membership testing entirely
};

struct GameSpec {
    std::size_t n_players = 0;
    std::size_t dim = 0;
    Mat a_true;                       // d x d
    std::vector<Mat> sigma;           // d x d each
    std::vector<Mat> q;               // Nd x Nd each
    std::vector<Mat> r;               // d x d each
    std::vector<Vec> xbar;            // Nd each, reference positions of player i
    std::vector<Vec> x0;              // d each
    std::vector<Vec> prior_mu0;       // d^2 each
    std::vector<Mat> prior_sigma0;    // d^2 x d^2 each
    TruncationSet truncation;

    /// varsigma = sigma sigma^T / 2
    Mat varsigma(std::size_t i) const { return 0.5 * sigma[i] * sigma[i].transpose(); }
    /// d x d block (j, k) of player i's cost matrix
    Mat q_block(std::size_t i, std::size_t j, std::size_t k) const {
        const auto d = static_cast<Eigen::Index>(dim);
        return q[i].block(static_cast<Eigen::Index>(j) * d, static_cast<Eigen::Index>(k) * d, d, d);
    }
    /// d-sized block j of player i's reference vector
    Vec xbar_block(std::size_t i, std::size_t j) const {
        const auto d = static_cast<Eigen::Index>(dim);
        return xbar[i].segment(static_cast<Eigen::Index>(j) * d, d);
    }
};

/// Full-information solution for one player.
struct PlayerEquilibrium {
    Mat upsilon;      ///< Riccati solution
    Vec eta;          ///< stationary mean
    Mat lambda_mat;   ///< Lambda = R (varsigma Upsilon + A)
    Vec rho;          ///< rho = -R varsigma Upsilon eta
    double value = 0; ///< ergodic value lambda
    Mat gain_k;       ///< varsigma Upsilon + A
    Vec gain_b;       ///< varsigma Upsilon eta
    Mat stat_cov;     ///< Upsilon^{-1}

    const Vec& stat_mean() const { return eta; }
    /// Equilibrium feedback a(x; A) = K x - b.
    Vec feedback(const Vec& x) const { return gain_k * x - gain_b; }
};

struct EquilibriumSolution {
    Mat drift;  ///< drift matrix the solution was computed for
    std::vector<PlayerEquilibrium> players;
};

/// Raised when an instance is not solvable (Riccati or coupling system).
class GameError : public std::runtime_error {
public:
    explicit GameError(const std::string& what) : std::runtime_error(what) {}
};

/// Lists every checkable assumption violation; empty means valid.
std::vector<std::string> validate(const GameSpec& spec);

/// Symmetric PD solution of 1/2 Y varsigma R varsigma Y = 1/2 A^T R A + Q_ii,
/// from Y = M^{-1/2} [M^{1/2} S M^{1/2}]^{1/2} M^{-1/2}, M = varsigma R varsigma,
/// S = A^T R A + 2 Q_ii.
Mat solve_riccati(const Mat& a, const Mat& varsigma, const Mat& r, const Mat& q_ii);

/// Closed form for symmetric A, sigma = s I, R = r I:
/// Upsilon = (2 / s^2) sqrt((2 / r) Q* + A^2).
Mat solve_riccati_symmetric(const Mat& a, double s, double r, const Mat& q_star);

struct CouplingSystem {
    Mat b;  ///< Nd x Nd
    Vec p;  ///< Nd
};

CouplingSystem build_coupling_system(const GameSpec& spec, const Mat& a);

/// Solves B eta = p; throws GameError when B is numerically singular.
Vec solve_eta(const Mat& b, const Vec& p);

EquilibriumSolution equilibrium(const GameSpec& spec, const Mat& a);

/// Player i's optimal reply under drift `a` when the opponents keep the
/// stationary laws in `opponents`: own Riccati solution, own mean from the
/// i-th block row of B eta = p, and the value against those opponents.
PlayerEquilibrium best_response(const GameSpec& spec, const Mat& a, const EquilibriumSolution& opponents,
                                std::size_t i);

/// Ergodic value of player i from the closed-form expression
/// lambda = F0 - 1/2 eta^T Y s R s Y eta + tr(s R s Y + s R A).
/// The per-player `value` field of `eq` is not read.
double ergodic_value(const GameSpec& spec, const Mat& a, const EquilibriumSolution& eq, std::size_t i);

/// Quadratic-in-x representation of f^i against the stationary opponents:
///   f(x, alpha) = (x - h)^T Q_ii (x - h) + 2 (x - h)^T g + k0 + 1/2 alpha^T R alpha
/// with h = own reference block, g = sum_{j != i} Q_ij (eta^j - xbar^j).
struct RunningCost {
    Mat q_ii;
    Mat r;
    Vec h;
    Vec g;
    double k0 = 0;

    double operator()(const Vec& x, const Vec& alpha) const {
        const Vec e = x - h;
        return e.dot(q_ii * e) + 2.0 * e.dot(g) + k0 + 0.5 * alpha.dot(r * alpha);
    }
    /// Constant term of the state part as a polynomial in x.
    double constant_term() const { return h.dot(q_ii * h) - 2.0 * h.dot(g) + k0; }
};

/// Builds player i's stationary-opponent cost from the opponents' laws in eq.
RunningCost running_cost(const GameSpec& spec, const EquilibriumSolution& eq, std::size_t i);

/// (f(x, alpha) - lambda) dt; shared by the simulator and the metrics so
/// stored and recomputed increments agree bit-for-bit.
inline double regret_increment(const RunningCost& cost, double lambda, const Vec& x, const Vec& alpha, double dt) {
    return (cost(x, alpha) - lambda) * dt;
}

double expected_running_cost(const GameSpec& spec, const EquilibriumSolution& eq, std::size_t i,
                             const Vec& x, const Vec& alpha);

/// E_{x ~ m^i}[f^i(x, a(x; A))] in closed form (Gaussian moments).
double stationary_expected_cost(const GameSpec& spec, const EquilibriumSolution& eq, std::size_t i);

/// 1/2 (varsigma Upsilon + (varsigma Upsilon)^T) is positive definite for every player.
bool nash_condition_holds(const GameSpec& spec, const EquilibriumSolution& eq);

// -- instance builders --------------------------------------------------------

/// Parameters of the randomized baseline instance.
struct BaselineParams {
    std::size_t n_players = 10;
    std::size_t dim = 2;
    double a_diag = -0.5;
    double sigma_base = 0.5;
    double sigma_noise = 0.05;
    double epsilon = 0.05;
    double xbar_scale = 1.0;
    double x0_offset = 0.5;  ///< initial state is x0_offset * e_2 (e_1 when d = 1)
    int max_spec_rejects = 10000;
    TruncationSet truncation;
};

/// Random baseline instance; cost draws that violate (A4) or Q_ii PD are
/// rejected and redrawn per player. The prior is N(0, 0.01 I).
GameSpec make_baseline_spec(const BaselineParams& params, std::mt19937_64& rng);

/// d = 1, N = 1, A = -0.5, sigma = 1, R = 1, Q = 0.375, xbar = 0.
GameSpec make_scalar_spec();

struct SymmetricParams {
    std::size_t n_players = 3;
    Mat a;          ///< symmetric drift
    double s = 0.8;
    double r = 1.0;
    Mat q_star;     ///< own block
    Mat q_check;    ///< off-diagonal blocks are q_check / 2
    Vec h;          ///< own reference
    Vec delta;      ///< reference for the others
};

/// Nearly-identical-players instance with symmetric drift.
GameSpec make_symmetric_spec(const SymmetricParams& params);

SymmetricParams default_symmetric_params();

/// Replaces every player's Gaussian prior.
void set_prior(GameSpec& spec, const Vec& mu0, const Mat& sigma0);

}  // namespace tsgame
