#include "doctest.h"

#include "tsgame/config.hpp"

using namespace tsgame;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("minimal file fills the baseline defaults") {
    const auto cfg = parse_config("[experiment]\nsuite = vs_ce\n");
    CHECK(cfg.game.n_players == 10);
    CHECK(cfg.game.dim == 2);
    CHECK(cfg.sim.dt == 0.05);
    CHECK(cfg.sim.steps == 5000);
    CHECK(cfg.game.tracked_player == 3);
    const auto spec = build_spec(cfg);
    CHECK(spec.x0[3] == (Vec(2) << 0, 0.5).finished());
    CHECK(spec.a_true == -0.5 * Mat::Identity(2, 2));
    CHECK((spec.prior_sigma0[3] - 0.01 * Mat::Identity(4, 4)).norm() < 1e-15);
    CHECK(sim_config(cfg).players == std::vector<std::size_t>{3});
}

TEST_CASE("suite defaults and explicit keys") {
    CHECK(parse_config("[experiment]\nsuite = regret_baseline\n").sim.paths == 100);
    const auto lh = parse_config("[experiment]\nsuite = long_horizon\n");
    CHECK(lh.sim.dt * double(lh.sim.steps) == doctest::Approx(1000.0));
    CHECK(lh.sim.paths == 10);
    CHECK(parse_config("[experiment]\nsuite = nash_convergence\n").sim.steps * 0.05 == doctest::Approx(10000.0));
    const auto c = parse_config("[experiment]\nsuite = long_horizon\n[sim]\npaths = 3\n");
    CHECK(c.sim.paths == 3);
    CHECK(is_slow(Suite::LongHorizon));
    CHECK(is_slow(Suite::NashConvergence));
    CHECK_FALSE(is_slow(Suite::RegretBaseline));
}

TEST_CASE("suite override replaces file suite and its defaults") {
    const auto c = parse_config("[experiment]\nsuite = long_horizon\n", "<t>", Suite::VsCe);
    CHECK(c.suite == Suite::VsCe);
    CHECK(c.sim.steps == 5000);
    CHECK(parse_config("[sim]\npaths = 2\n", "<t>", Suite::Validate).sim.paths == 2);
}

TEST_CASE("errors") {
    CHECK(error_of("[sim]\npaths = 3\n").find("[experiment] suite") != std::string::npos);
    const auto multi = error_of("[experiment]\nsuite = vs_ce\n[sim]\npath = 3\ndt = -1\n[bogus]\nx = 1\n");
    CHECK(multi.find("unknown key [sim] path") != std::string::npos);
    CHECK(multi.find("unknown key [bogus] x") != std::string::npos);
    CHECK(multi.find("dt") != std::string::npos);
    CHECK(error_of("[experiment]\nsuite = nope\n").find("unknown suite") != std::string::npos);
    const auto line = error_of("[experiment]\nsuite = vs_ce\n[sim\n");
    CHECK(line.find("<string>:3") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("canonical text round trip for every suite") {
    for (const char* s : {"regret_baseline", "long_horizon", "vs_ce", "vs_blind", "dim_sweep", "prior_robustness",
                          "ablation_mu", "ablation_sigma_scale", "ablation_sigma_structure", "nash_convergence",
                          "validate"}) {
        auto cfg = parse_config(std::string("[experiment]\nsuite = ") + s + "\n[prior]\nscale = 0.3\n[game]\nepsilon = 0.1\n");
        cfg.sweep.scales = {0.1, 1.0 / 3.0};
        const auto text = canonical_text(cfg);
        const auto again = parse_config(text);
        CHECK(canonical_text(again) == text);
        CHECK(config_hash(again) == config_hash(cfg));
        CHECK(config_hash(cfg).size() == 16);
    }
    auto a = parse_config("[experiment]\nsuite = vs_ce\n");
    auto b = a;
    b.sim.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.out = "elsewhere";
    b.threads = 4;
    CHECK(config_hash(a) == config_hash(b));
}

TEST_CASE("format_double is shortest round trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("prior construction") {
    const Mat a = -0.5 * Mat::Identity(2, 2);
    PriorSection p;
    auto [m0, s0] = build_prior(p, a);
    CHECK(m0 == Vec::Zero(4));
    CHECK((s0 - 0.01 * Mat::Identity(4, 4)).norm() < 1e-15);

    p.mean = PriorMean::ATrue;
    CHECK(build_prior(p, a).first == vectorize(a));
    p.mean = PriorMean::Constant;
    CHECK((build_prior(p, a).first.array() == 0.3).all());

    p.cov = PriorCov::Correlated;
    const Mat c = build_prior(p, a).second;
    CHECK(c(0, 0) == 0.5);
    CHECK(c(0, 3) == 0.1);
    p.cov = PriorCov::RankOne;
    const Mat r = build_prior(p, a).second;
    CHECK(is_positive_definite(r));
    Eigen::SelfAdjointEigenSolver<Mat> es(r - 0.01 * Mat::Identity(4, 4));
    CHECK(es.eigenvalues()(2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(es.eigenvalues()(3) > 0.01);
}

TEST_CASE("dimension scaling keeps the instance valid") {
    auto cfg = parse_config("[experiment]\nsuite = dim_sweep\n");
    for (std::size_t d : {2, 5, 10, 20}) {
        cfg.game.dim = d;
        CHECK(validate(build_spec(cfg)).empty());
    }
}
