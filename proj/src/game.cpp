#include "tsgame/game.hpp"

#include <cmath>
#include <sstream>

namespace tsgame {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

std::string player_tag(const char* what, std::size_t i) {
    std::ostringstream os;
    os << what << "[" << i << "]";
    return os.str();
}

double min_eigenvalue(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// lambda_min(Q_ii) - sum_{j != i} ||Q_ij||_F
double diagonal_dominance_margin(const GameSpec& spec, std::size_t i) {
    double off = 0.0;
    for (std::size_t j = 0; j < spec.n_players; ++j) {
        if (j != i) off += spec.q_block(i, i, j).norm();
    }
    return min_eigenvalue(spec.q_block(i, i, i)) - off;
}

Mat symmetric_gaussian(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat e(n, n);
    for (Index r = 0; r < n; ++r) {
        for (Index c = r; c < n; ++c) {
            e(r, c) = normal(rng);
            e(c, r) = e(r, c);
        }
    }
    return e;
}

}  // namespace

std::vector<std::string> validate(const GameSpec& spec) {
    std::vector<std::string> out;
    const std::size_t n = spec.n_players;
    const Index d = idx(spec.dim);
    if (n == 0 || d == 0) {
        out.emplace_back("dimensions: N and d must be positive");
        return out;
    }
    auto sized = [n](std::size_t s) { return s == n; };
    if (spec.a_true.rows() != d || spec.a_true.cols() != d) out.emplace_back("dimensions: A is not d x d");
    if (!sized(spec.sigma.size()) || !sized(spec.q.size()) || !sized(spec.r.size()) || !sized(spec.xbar.size()) ||
        !sized(spec.x0.size()) || !sized(spec.prior_mu0.size()) || !sized(spec.prior_sigma0.size())) {
        out.emplace_back("dimensions: per-player arrays must have N entries");
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        bool shapes_ok = spec.sigma[i].rows() == d && spec.sigma[i].cols() == d && spec.r[i].rows() == d &&
                         spec.r[i].cols() == d && spec.q[i].rows() == idx(n) * d && spec.q[i].cols() == idx(n) * d &&
                         spec.xbar[i].size() == idx(n) * d && spec.x0[i].size() == d &&
                         spec.prior_mu0[i].size() == d * d && spec.prior_sigma0[i].rows() == d * d &&
                         spec.prior_sigma0[i].cols() == d * d;
        if (!shapes_ok) {
            out.push_back("dimensions: player " + std::to_string(i) + " has mis-sized data");
        }
    }
    if (!out.empty()) return out;
    if (!spec.a_true.allFinite()) out.emplace_back("A: non-finite entries");

    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(spec.sigma[i].determinant()) < 1e-12) {
            out.push_back("(A3) " + player_tag("sigma", i) + " not invertible");
        }
        if (!is_symmetric(spec.r[i])) {
            out.push_back("(A3) " + player_tag("R", i) + " not symmetric");
        } else if (!is_positive_definite(spec.r[i])) {
            out.push_back("(A3) " + player_tag("R", i) + " not positive definite");
        }
        if (!is_symmetric(spec.q[i])) {
            out.push_back("(A3) " + player_tag("Q", i) + " not symmetric");
        }
        const Mat q_ii = spec.q_block(i, i, i);
        if (!is_symmetric(q_ii) || !is_positive_definite(q_ii)) {
            out.push_back("(A3) " + player_tag("Q", i) + " own block not symmetric positive definite");
        } else if (diagonal_dominance_margin(spec, i) <= 0.0) {
            out.push_back("(A4) " + player_tag("Q", i) + " own block does not dominate off-diagonal blocks");
        }
        const Mat& s0 = spec.prior_sigma0[i];
        if (!is_symmetric(s0) || !is_positive_definite(s0) || !std::isfinite(s0.trace())) {
            out.push_back("prior: " + player_tag("Sigma0", i) + " not symmetric positive definite");
        }
        if (!spec.prior_mu0[i].allFinite()) {
            out.push_back("prior: " + player_tag("mu0", i) + " non-finite");
        }
    }
    if (spec.truncation.max_norm <= 0.0) out.emplace_back("truncation: M_A must be positive");
    if (spec.truncation.decay_margin <= 0.0) out.emplace_back("truncation: c must be positive");

    if (!out.empty()) return out;
    // (A1)/(A2) constructively.
    for (std::size_t i = 0; i < n; ++i) {
        try {
            solve_riccati(spec.a_true, spec.varsigma(i), spec.r[i], spec.q_block(i, i, i));
        } catch (const std::exception& e) {
            out.push_back("(A1) Riccati equation for player " + std::to_string(i) + " not solvable: " + e.what());
        }
    }
    try {
        const auto sys = build_coupling_system(spec, spec.a_true);
        solve_eta(sys.b, sys.p);
    } catch (const std::exception&) {
        out.emplace_back("(A2) coupling matrix B is singular");
    }
    return out;
}

Mat solve_riccati(const Mat& a, const Mat& varsigma, const Mat& r, const Mat& q_ii) {
    const Mat m = symmetrize(varsigma * r * varsigma);
    const Mat s = symmetrize(a.transpose() * r * a + 2.0 * q_ii);
    Mat m_half;
    Mat m_inv_half;
    try {
        m_half = sqrt_spd(m);
        m_inv_half = inv_sqrt_spd(m);
    } catch (const LinalgError& e) {
        throw GameError(std::string("solve_riccati: varsigma R varsigma not SPD (") + e.what() + ")");
    }
    Mat inner;
    try {
        inner = sqrt_spd(symmetrize(m_half * s * m_half));
    } catch (const LinalgError& e) {
        throw GameError(std::string("solve_riccati: A^T R A + 2 Q_ii not SPD (") + e.what() + ")");
    }
    return symmetrize(m_inv_half * inner * m_inv_half);
}

Mat solve_riccati_symmetric(const Mat& a, double s, double r, const Mat& q_star) {
    return (2.0 / (s * s)) * sqrt_spd(symmetrize((2.0 / r) * q_star + a * a));
}

CouplingSystem build_coupling_system(const GameSpec& spec, const Mat& a) {
    const std::size_t n = spec.n_players;
    const Index d = idx(spec.dim);
    CouplingSystem sys{Mat::Zero(idx(n) * d, idx(n) * d), Vec::Zero(idx(n) * d)};
    for (std::size_t i = 0; i < n; ++i) {
        Vec p_i = Vec::Zero(d);
        for (std::size_t j = 0; j < n; ++j) {
            Mat b_ij = -spec.q_block(i, i, j);
            if (i == j) b_ij -= 0.5 * a.transpose() * spec.r[i] * a;
            sys.b.block(idx(i) * d, idx(j) * d, d, d) = b_ij;
            p_i -= spec.q_block(i, i, j) * spec.xbar_block(i, j);
        }
        sys.p.segment(idx(i) * d, d) = p_i;
    }
    return sys;
}

Vec solve_eta(const Mat& b, const Vec& p) {
    Eigen::FullPivLU<Mat> lu(b);
    if (!lu.isInvertible()) {
        throw GameError("solve_eta: coupling matrix B is singular (A2)");
    }
    Vec eta = lu.solve(p);
    if ((b * eta - p).norm() > 1e-9 * (1.0 + p.norm())) {
        throw GameError("solve_eta: coupling matrix B is numerically singular (A2)");
    }
    return eta;
}

EquilibriumSolution equilibrium(const GameSpec& spec, const Mat& a) {
    const std::size_t n = spec.n_players;
    const Index d = idx(spec.dim);
    EquilibriumSolution sol;
    sol.drift = a;
    sol.players.resize(n);
    const auto sys = build_coupling_system(spec, a);
    const Vec eta = solve_eta(sys.b, sys.p);
    for (std::size_t i = 0; i < n; ++i) {
        auto& pl = sol.players[i];
        const Mat vs = spec.varsigma(i);
        pl.upsilon = solve_riccati(a, vs, spec.r[i], spec.q_block(i, i, i));
        pl.eta = eta.segment(idx(i) * d, d);
        pl.gain_k = vs * pl.upsilon + a;
        pl.gain_b = vs * pl.upsilon * pl.eta;
        pl.lambda_mat = spec.r[i] * pl.gain_k;
        pl.rho = -spec.r[i] * pl.gain_b;
        pl.stat_cov = symmetrize(pl.upsilon.inverse());
    }
    for (std::size_t i = 0; i < n; ++i) {
        sol.players[i].value = ergodic_value(spec, a, sol, i);
    }
    return sol;
}

PlayerEquilibrium best_response(const GameSpec& spec, const Mat& a, const EquilibriumSolution& opponents,
                                std::size_t i) {
    const Index d = idx(spec.dim);
    const auto sys = build_coupling_system(spec, a);
    Vec rhs = sys.p.segment(idx(i) * d, d);
    for (std::size_t j = 0; j < spec.n_players; ++j) {
        if (j != i) rhs -= sys.b.block(idx(i) * d, idx(j) * d, d, d) * opponents.players[j].eta;
    }
    const Mat b_ii = sys.b.block(idx(i) * d, idx(i) * d, d, d);
    EquilibriumSolution hybrid = opponents;
    hybrid.drift = a;
    auto& pl = hybrid.players[i];
    const Mat vs = spec.varsigma(i);
    pl.upsilon = solve_riccati(a, vs, spec.r[i], spec.q_block(i, i, i));
    pl.eta = solve_eta(b_ii, rhs);
    pl.gain_k = vs * pl.upsilon + a;
    pl.gain_b = vs * pl.upsilon * pl.eta;
    pl.lambda_mat = spec.r[i] * pl.gain_k;
    pl.rho = -spec.r[i] * pl.gain_b;
    pl.stat_cov = symmetrize(pl.upsilon.inverse());
    pl.value = ergodic_value(spec, a, hybrid, i);
    return pl;
}

double ergodic_value(const GameSpec& spec, const Mat& a, const EquilibriumSolution& eq, std::size_t i) {
    const std::size_t n = spec.n_players;
    const auto& self = eq.players[i];
    const Vec own_ref = spec.xbar_block(i, i);
    const Mat q_ii = spec.q_block(i, i, i);

    // F0: constant term of the opponent-averaged state cost.
    auto dev = [&](std::size_t j) -> Vec { return eq.players[j].eta - spec.xbar_block(i, j); };
    double f0 = own_ref.dot(q_ii * own_ref);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        f0 -= 2.0 * own_ref.dot(spec.q_block(i, i, j) * dev(j));
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i || k == j) continue;
            f0 += dev(j).dot(spec.q_block(i, j, k) * dev(k));
        }
        const Mat q_jj = spec.q_block(i, j, j);
        f0 += (q_jj * eq.players[j].stat_cov).trace() + dev(j).dot(q_jj * dev(j));
    }

    const Mat vs = spec.varsigma(i);
    const Mat& r = spec.r[i];
    const Mat& y = self.upsilon;
    const double quad = 0.5 * self.eta.dot(y * vs * r * vs * y * self.eta);
    return f0 - quad + (vs * r * vs * y + vs * r * a).trace();
}

RunningCost running_cost(const GameSpec& spec, const EquilibriumSolution& eq, std::size_t i) {
    const std::size_t n = spec.n_players;
    RunningCost c;
    c.q_ii = spec.q_block(i, i, i);
    c.r = spec.r[i];
    c.h = spec.xbar_block(i, i);
    c.g = Vec::Zero(idx(spec.dim));
    c.k0 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const Vec mj = eq.players[j].eta - spec.xbar_block(i, j);
        c.g += spec.q_block(i, i, j) * mj;
        c.k0 += (spec.q_block(i, j, j) * eq.players[j].stat_cov).trace();
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            c.k0 += mj.dot(spec.q_block(i, j, k) * (eq.players[k].eta - spec.xbar_block(i, k)));
        }
    }
    return c;
}

double expected_running_cost(const GameSpec& spec, const EquilibriumSolution& eq, std::size_t i, const Vec& x,
                             const Vec& alpha) {
    return running_cost(spec, eq, i)(x, alpha);
}

double stationary_expected_cost(const GameSpec& spec, const EquilibriumSolution& eq, std::size_t i) {
    const auto c = running_cost(spec, eq, i);
    const auto& pl = eq.players[i];
    const Mat& v = pl.stat_cov;
    // x = eta + z, z ~ N(0, V); a(x) = K x - b = (K eta - b) + K z
    const Vec e = pl.eta - c.h;
    const Vec a_mean = pl.feedback(pl.eta);
    const double state = e.dot(c.q_ii * e) + (c.q_ii * v).trace() + 2.0 * e.dot(c.g) + c.k0;
    const double control =
        0.5 * (a_mean.dot(c.r * a_mean) + (pl.gain_k.transpose() * c.r * pl.gain_k * v).trace());
    return state + control;
}

bool nash_condition_holds(const GameSpec& spec, const EquilibriumSolution& eq) {
    for (std::size_t i = 0; i < spec.n_players; ++i) {
        const Mat sy = spec.varsigma(i) * eq.players[i].upsilon;
        if (!is_positive_definite(symmetrize(sy))) return false;
    }
    return true;
}

GameSpec make_baseline_spec(const BaselineParams& params, std::mt19937_64& rng) {
    const std::size_t n = params.n_players;
    const Index d = idx(params.dim);
    const Index nd = idx(n) * d;
    std::normal_distribution<double> normal(0.0, 1.0);

    GameSpec spec;
    spec.n_players = n;
    spec.dim = params.dim;
    spec.a_true = params.a_diag * Mat::Identity(d, d);
    spec.truncation = params.truncation;
    for (std::size_t i = 0; i < n; ++i) {
        Mat z(d, d);
        for (Index r = 0; r < d; ++r) {
            for (Index c = 0; c < d; ++c) z(r, c) = normal(rng);
        }
        spec.sigma.push_back(params.sigma_base * Mat::Identity(d, d) + params.sigma_noise * z);

        Vec xbar(nd);
        for (Index k = 0; k < nd; ++k) xbar(k) = params.xbar_scale * normal(rng);
        spec.xbar.push_back(xbar);

        Vec x0 = Vec::Zero(d);
        x0(d >= 2 ? 1 : 0) = params.x0_offset;
        spec.x0.push_back(x0);
        spec.prior_mu0.push_back(Vec::Zero(d * d));
        spec.prior_sigma0.push_back(0.01 * Mat::Identity(d * d, d * d));
    }
    spec.q.resize(n);
    spec.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool accepted = false;
        for (int attempt = 0; attempt < params.max_spec_rejects && !accepted; ++attempt) {
            spec.q[i] = Mat::Identity(nd, nd) + params.epsilon * symmetric_gaussian(nd, rng);
            spec.r[i] = Mat::Identity(d, d) + params.epsilon * symmetric_gaussian(d, rng);
            accepted = is_positive_definite(spec.r[i]) && is_positive_definite(spec.q_block(i, i, i)) &&
                       diagonal_dominance_margin(spec, i) > 0.0;
        }
        if (!accepted) {
            throw GameError("make_baseline_spec: no cost draw satisfying (A4) for player " + std::to_string(i) +
                            " after " + std::to_string(params.max_spec_rejects) + " attempts; reduce epsilon");
        }
    }
    return spec;
}

GameSpec make_scalar_spec() {
    GameSpec spec;
    spec.n_players = 1;
    spec.dim = 1;
    spec.a_true = Mat::Constant(1, 1, -0.5);
    spec.sigma = {Mat::Constant(1, 1, 1.0)};
    spec.q = {Mat::Constant(1, 1, 0.375)};
    spec.r = {Mat::Constant(1, 1, 1.0)};
    spec.xbar = {Vec::Zero(1)};
    spec.x0 = {Vec::Zero(1)};
    spec.prior_mu0 = {Vec::Zero(1)};
    spec.prior_sigma0 = {Mat::Constant(1, 1, 0.01)};
    return spec;
}

SymmetricParams default_symmetric_params() {
    SymmetricParams p;
    p.n_players = 3;
    p.a.resize(2, 2);
    p.a << -0.5, 0.2, 0.2, -0.3;
    p.s = 0.8;
    p.r = 1.0;
    p.q_star.resize(2, 2);
    p.q_star << 1.0, 0.1, 0.1, 0.8;
    p.q_check = 0.2 * Mat::Identity(2, 2);
    p.h.resize(2);
    p.h << 1.0, -0.5;
    p.delta.resize(2);
    p.delta << 0.3, 0.2;
    return p;
}

GameSpec make_symmetric_spec(const SymmetricParams& p) {
    const std::size_t n = p.n_players;
    const Index d = p.a.rows();
    const Index nd = idx(n) * d;
    GameSpec spec;
    spec.n_players = n;
    spec.dim = static_cast<std::size_t>(d);
    spec.a_true = p.a;
    for (std::size_t i = 0; i < n; ++i) {
        spec.sigma.push_back(p.s * Mat::Identity(d, d));
        spec.r.push_back(p.r * Mat::Identity(d, d));
        Mat q = Mat::Zero(nd, nd);
        Vec xbar(nd);
        for (std::size_t j = 0; j < n; ++j) {
            xbar.segment(idx(j) * d, d) = (j == i) ? p.h : p.delta;
            if (j == i) {
                q.block(idx(i) * d, idx(i) * d, d, d) = p.q_star;
            } else {
                q.block(idx(i) * d, idx(j) * d, d, d) = 0.5 * p.q_check;
                q.block(idx(j) * d, idx(i) * d, d, d) = 0.5 * p.q_check;
            }
        }
        spec.q.push_back(q);
        spec.xbar.push_back(xbar);
        spec.x0.push_back(Vec::Zero(d));
        spec.prior_mu0.push_back(Vec::Zero(d * d));
        spec.prior_sigma0.push_back(0.01 * Mat::Identity(d * d, d * d));
    }
    return spec;
}

void set_prior(GameSpec& spec, const Vec& mu0, const Mat& sigma0) {
    for (std::size_t i = 0; i < spec.n_players; ++i) {
        spec.prior_mu0[i] = mu0;
        spec.prior_sigma0[i] = sigma0;
    }
}

}  // namespace tsgame
