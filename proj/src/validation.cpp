#include "tsgame/validation.hpp"

#include "tsgame/filtering.hpp"
#include "tsgame/rng.hpp"

#include <cmath>
#include <sstream>

namespace tsgame {

namespace {

Mat gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = n(rng);
    }
    return m;
}

std::string sci(double v) {
    std::ostringstream o;
    o.precision(3);
    o << std::scientific << v;
    return o.str();
}

}  // namespace

RiccatiCase random_riccati_case(std::mt19937_64& rng, std::size_t max_dim) {
    std::uniform_int_distribution<std::size_t> dim(1, max_dim);
    const auto d = static_cast<Eigen::Index>(dim(rng));
    RiccatiCase c;
    c.a = gaussian(rng, d, d) / std::sqrt(static_cast<double>(d));
    const Mat sigma = 0.5 * Mat::Identity(d, d) + 0.1 * gaussian(rng, d, d);
    c.varsigma = symmetrize(0.5 * sigma * sigma.transpose());
    const Mat rb = gaussian(rng, d, d);
    c.r = symmetrize(Mat::Identity(d, d) + 0.1 * rb * rb.transpose());
    const Mat qb = gaussian(rng, d, d);
    c.q_ii = symmetrize(0.5 * Mat::Identity(d, d) + qb * qb.transpose() / static_cast<double>(d));
    return c;
}

Check check_riccati_residuals(std::size_t count, std::uint64_t seed, std::size_t max_dim) {
    auto rng = make_stream(seed, 0, 0, StreamPurpose::Spec);
    double worst = 0;
    bool pd = true;
    for (std::size_t k = 0; k < count; ++k) {
        const auto c = random_riccati_case(rng, max_dim);
        const Mat y = solve_riccati(c.a, c.varsigma, c.r, c.q_ii);
        const Mat res = 0.5 * y * c.varsigma * c.r * c.varsigma * y - (0.5 * c.a.transpose() * c.r * c.a + c.q_ii);
        worst = std::max(worst, res.norm() / (1e-9 * (1.0 + c.q_ii.norm())));
        pd = pd && is_positive_definite(y);
    }
    return {"riccati_residuals", worst <= 1.0 && pd,
            "instances=" + std::to_string(count) + " worst residual/tolerance=" + sci(worst) +
                (pd ? "" : " (non-PD solution)")};
}

Check check_symmetric_closed_form() {
    const auto p = default_symmetric_params();
    const Mat vs = 0.5 * p.s * p.s * Mat::Identity(p.a.rows(), p.a.cols());
    const Mat general = solve_riccati(p.a, vs, p.r * Mat::Identity(p.a.rows(), p.a.cols()), p.q_star);
    const Mat closed = solve_riccati_symmetric(p.a, p.s, p.r, p.q_star);
    const double err = (general - closed).norm();
    return {"symmetric_closed_form", err <= 1e-10, "||general - closed||_F=" + sci(err)};
}

Check check_scalar_value() {
    const auto spec = make_scalar_spec();
    const auto eq = equilibrium(spec, spec.a_true);
    const double lam = ergodic_value(spec, spec.a_true, eq, 0);
    const double ups = eq.players[0].upsilon(0, 0);
    const bool ok = std::abs(lam - 0.25) <= 1e-12 && std::abs(ups - 2.0) <= 1e-12;
    std::ostringstream o;
    o.precision(17);
    o << "lambda=" << lam << " upsilon=" << ups;
    return {"scalar_value", ok, o.str()};
}

Check check_filter_oracle(std::size_t trajectories, std::uint64_t seed, std::size_t max_dim) {
    auto rng = make_stream(seed, 0, 0, StreamPurpose::Spec);
    std::uniform_int_distribution<std::size_t> dim(1, max_dim);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0;
    for (std::size_t k = 0; k < trajectories; ++k) {
        const auto d = static_cast<Eigen::Index>(dim(rng));
        GameSpec spec;
        spec.n_players = 1;
        spec.dim = static_cast<std::size_t>(d);
        spec.a_true = -0.5 * Mat::Identity(d, d) + 0.2 * gaussian(rng, d, d);
        spec.sigma = {0.5 * Mat::Identity(d, d) + 0.05 * gaussian(rng, d, d)};
        const Mat pb = gaussian(rng, d * d, d * d);
        const Mat prior_sigma = symmetrize(0.01 * Mat::Identity(d * d, d * d) + 0.005 * pb * pb.transpose());
        const Vec prior_mu = 0.1 * gaussian(rng, d * d, 1);
        // stable closed loop; unstable draws blow the state up and make the
        // comparison an exercise in roundoff
        Mat gain = 0.3 * gaussian(rng, d, d);
        while (spectral_abscissa(spec.a_true - gain) > -0.05) gain = 0.3 * gaussian(rng, d, d);

        const double dt = 0.05;
        const std::size_t n = 400;
        std::vector<FilterStep> steps;
        auto state = PosteriorState::from_prior(prior_mu, prior_sigma);
        const Mat noise_prec = noise_precision(spec.sigma[0]);
        Vec x = Vec::Ones(d);
        for (std::size_t s = 0; s < n; ++s) {
            Vec dw(d);
            for (Eigen::Index j = 0; j < d; ++j) dw(j) = std::sqrt(dt) * normal(rng);
            const Vec alpha = gain * x;
            const Vec next = x + (spec.a_true * x - alpha) * dt + spec.sigma[0] * dw;
            FilterStep st{x, next - x, alpha, dt};
            steps.push_back(st);
            filter_update_inplace(state, st, noise_prec);
            if (s == n / 2) state = reset_anchor(state);
            x = next;
        }
        const auto [mu, sigma] = bayes_regression_oracle(prior_mu, prior_sigma, steps, spec, 0);
        worst = std::max({worst, (state.mu - mu).cwiseAbs().maxCoeff(), (state.sigma - sigma).cwiseAbs().maxCoeff()});
    }
    return {"filter_oracle", worst <= 1e-8,
            "trajectories=" + std::to_string(trajectories) + " worst abs difference=" + sci(worst)};
}

Check check_lyapunov_stationary() {
    const auto p = default_symmetric_params();
    const auto spec = make_symmetric_spec(p);
    const auto eq = equilibrium(spec, spec.a_true);
    const Mat f = -spec.varsigma(0) * eq.players[0].upsilon;
    const Mat c = spec.sigma[0] * spec.sigma[0].transpose();
    const Mat v = solve_lyapunov(f, c);
    const double err = (v - eq.players[0].stat_cov).norm() / eq.players[0].stat_cov.norm();
    return {"lyapunov_stationary", err <= 1e-9, "relative ||V - Upsilon^-1||_F=" + sci(err)};
}

Check check_value_consistency(const GameSpec& spec) {
    const auto eq = equilibrium(spec, spec.a_true);
    double worst = 0;
    for (std::size_t i = 0; i < spec.n_players; ++i) {
        worst = std::max(worst, std::abs(eq.players[i].value - stationary_expected_cost(spec, eq, i)));
    }
    return {"value_consistency", worst <= 1e-8, "max |lambda - E_m[f]|=" + sci(worst)};
}

Check check_spec_assumptions(const GameSpec& spec) {
    const auto violations = validate(spec);
    std::string detail = violations.empty() ? "no violations" : "";
    for (const auto& v : violations) detail += (detail.empty() ? "" : "; ") + v;
    bool nash = false;
    if (violations.empty()) {
        nash = nash_condition_holds(spec, equilibrium(spec, spec.a_true));
        detail += nash ? ", sym(varsigma Upsilon) PD" : ", sym(varsigma Upsilon) not PD";
    }
    return {"spec_assumptions", violations.empty() && nash, detail};
}

std::vector<Check> validation_battery(const GameSpec& spec, std::uint64_t seed) {
    return {
        check_spec_assumptions(spec),
        check_riccati_residuals(200, seed),
        check_symmetric_closed_form(),
        check_scalar_value(),
        check_filter_oracle(50, seed + 1),
        check_lyapunov_stationary(),
        check_value_consistency(spec),
    };
}

}  // namespace tsgame
