#include "tsgame/ts_controller.hpp"

namespace tsgame {

bool in_truncation_set(const Mat& a_hat, const Mat& reference, const Mat& upsilon, const GameSpec& spec,
                       std::size_t i) {
    const auto& tr = spec.truncation;
    if (a_hat.norm() > tr.max_norm) return false;
    const Mat vy = spec.varsigma(i) * upsilon;
    if (spectral_abscissa(reference - a_hat - vy) > -tr.decay_margin) return false;
    return spectral_abscissa(-vy) <= -0.5 * tr.decay_margin;
}

namespace {

std::optional<EquilibriumSolution> try_equilibrium(const GameSpec& spec, const Mat& a) {
    try {
        return equilibrium(spec, a);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

SampleResult sample_truncated(const DrawFn& draw, const Mat& reference, const Vec& fallback_mean,
                              const GameSpec& spec, std::size_t i, Rng& rng) {
    const auto& tr = spec.truncation;
    SampleResult out;
    for (int attempt = 0; attempt < std::max(1, tr.max_rejects); ++attempt) {
        const Mat cand = unvectorize(draw(rng));
        if (!cand.allFinite()) {
            ++out.rejects;
            continue;
        }
        if (tr.enabled && cand.norm() > tr.max_norm) {
            ++out.rejects;
            continue;
        }
        auto eq = try_equilibrium(spec, cand);
        if (!eq || (tr.enabled && !in_truncation_set(cand, reference, eq->players[i].upsilon, spec, i))) {
            ++out.rejects;
            continue;
        }
        out.a_hat = cand;
        out.eq = std::move(*eq);
        return out;
    }
    out.fallback = true;
    out.a_hat = project_frobenius_ball(unvectorize(fallback_mean), tr.max_norm);
    auto eq = try_equilibrium(spec, out.a_hat);
    if (!eq) {
        throw GameError("sample_truncated: fallback drift has no equilibrium");
    }
    out.eq = std::move(*eq);
    return out;
}

SampleResult sample_parameter(const PosteriorState& posterior, const GameSpec& spec, std::size_t i, Rng& rng) {
    const Eigen::LLT<Mat> llt(posterior.sigma);
    if (llt.info() != Eigen::Success) {
        throw FilterError("sample_parameter: posterior covariance not positive definite");
    }
    const Mat l = llt.matrixL();
    const Vec mu = posterior.mu;
    DrawFn draw = [l, mu](Rng& g) {
        std::normal_distribution<double> normal(0.0, 1.0);
        Vec z(mu.size());
        for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(g);
        return Vec(mu + l * z);
    };
    return sample_truncated(draw, unvectorize(mu), mu, spec, i, rng);
}

EpisodeEnd episode_end_reason(double now, const EpisodeState& es, double det_ratio, double grid_tol) {
    const double elapsed = now - es.t_k;
    const bool halved = det_ratio < 0.5;
    if (es.k == 0) {
        if (!(elapsed > 1.0 + grid_tol)) return EpisodeEnd::None;
        if (elapsed >= 2.0 - grid_tol) return EpisodeEnd::Length;
        return halved ? EpisodeEnd::Determinant : EpisodeEnd::None;
    }
    if (elapsed < 1.0 - grid_tol) return EpisodeEnd::None;
    if (halved) return EpisodeEnd::Determinant;
    if (elapsed >= es.t_prev + 1.0 - grid_tol) return EpisodeEnd::Length;
    return EpisodeEnd::None;
}

bool should_end_episode(double now, const EpisodeState& es, double det_ratio, double grid_tol) {
    return episode_end_reason(now, es, det_ratio, grid_tol) != EpisodeEnd::None;
}

EpisodeState make_episode(const SampleResult& sample, const GameSpec& /*spec*/, std::size_t i, int k, double now,
                          double t_prev) {
    EpisodeState es;
    es.k = k;
    es.t_k = now;
    es.t_prev = t_prev;
    es.a_hat = sample.a_hat;
    const auto& pl = sample.eq.players[i];
    es.upsilon_k = pl.upsilon;
    es.eta_k = pl.eta;
    es.gain_k = pl.gain_k;
    es.gain_b = pl.gain_b;
    es.rejects = sample.rejects;
    es.fallback = sample.fallback;
    return es;
}

EpisodeState start_episode(PosteriorState& posterior, const GameSpec& spec, std::size_t i, double now,
                           const std::optional<EpisodeState>& prev, Rng& rng) {
    const int k = prev ? prev->k + 1 : 0;
    const double t_prev = prev ? now - prev->t_k : 0.0;
    const auto sample = sample_parameter(posterior, spec, i, rng);
    posterior = reset_anchor(posterior);
    return make_episode(sample, spec, i, k, now, t_prev);
}

ThompsonSampler::ThompsonSampler(const GameSpec& spec, std::size_t player, Rng rng,
                                 std::optional<PriorSampler> initial)
    : spec_(&spec),
      player_(player),
      rng_(std::move(rng)),
      noise_prec_(noise_precision(spec.sigma[player])),
      posterior_(PosteriorState::from_prior(spec.prior_mu0[player], spec.prior_sigma0[player])) {
    if (initial) {
        const PriorSampler sampler = *initial;
        DrawFn draw = [sampler](Rng& g) { return sampler.sample(g); };
        const auto sample = sample_truncated(draw, unvectorize(sampler.mean()), sampler.mean(), spec, player, rng_);
        adopt(make_episode(sample, spec, player, 0, 0.0, 0.0));
    } else {
        adopt(start_episode(posterior_, spec, player, 0.0, std::nullopt, rng_));
    }
}

void ThompsonSampler::adopt(EpisodeState es) {
    if (forced_) {
        SampleResult s;
        s.a_hat = *forced_;
        s.eq = equilibrium(*spec_, *forced_);
        es = make_episode(s, *spec_, player_, es.k, es.t_k, es.t_prev);
    }
    episode_ = es;
    history_.push_back(es);
}

void ThompsonSampler::force_parameter(const Mat& a_hat) {
    forced_ = a_hat;
    history_.pop_back();
    adopt(episode_);
}

EpisodeEnd ThompsonSampler::observe(const FilterStep& step, double now, double grid_tol) {
    filter_update_inplace(posterior_, step, noise_prec_);
    const EpisodeEnd reason = episode_end_reason(now, episode_, det_ratio(posterior_), grid_tol);
    if (reason == EpisodeEnd::None) return reason;
    adopt(start_episode(posterior_, *spec_, player_, now, episode_, rng_));
    if (reason == EpisodeEnd::Determinant) {
        macro_.boundaries.push_back(episode_.k);
    }
    return reason;
}

}  // namespace tsgame
