#include "tsgame/filtering.hpp"

#include <cmath>

namespace tsgame {

namespace {

void recompute(PosteriorState& s, const Mat& noise_prec) {
    const Eigen::Index dd = s.anchor_mu.size();
    const Mat m = Mat::Identity(dd, dd) + s.anchor_sigma * kron(noise_prec, s.gram);
    const Eigen::PartialPivLU<Mat> lu(m);
    s.sigma = symmetrize(lu.solve(s.anchor_sigma));
    s.mu = lu.solve(s.anchor_mu + s.anchor_sigma * s.info);
    Eigen::LLT<Mat> llt(s.sigma);
    if (llt.info() != Eigen::Success) {
        throw FilterError("filter_update: posterior covariance lost positive definiteness (step size too coarse?)");
    }
    s.logdet = 2.0 * Mat(llt.matrixLLT()).diagonal().array().log().sum();
}

}  // namespace

PosteriorState PosteriorState::from_prior(const Vec& mu0, const Mat& sigma0) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(mu0.size()))));
    if (d * d != mu0.size() || sigma0.rows() != mu0.size() || sigma0.cols() != mu0.size()) {
        throw FilterError("PosteriorState: prior has inconsistent dimensions");
    }
    PosteriorState s;
    s.mu = mu0;
    s.sigma = symmetrize(sigma0);
    s.anchor_mu = mu0;
    s.anchor_sigma = s.sigma;
    s.logdet = log_det_spd(s.sigma);
    s.anchor_logdet = s.logdet;
    s.gram = Mat::Zero(d, d);
    s.info = Vec::Zero(d * d);
    return s;
}

Mat noise_precision(const Mat& sigma) { return symmetrize((sigma * sigma.transpose()).inverse()); }

void filter_update_inplace(PosteriorState& s, const FilterStep& step, const Mat& noise_prec) {
    if (!(step.dt > 0.0)) throw FilterError("filter_update: dt must be positive");
    const Eigen::Index d = s.gram.rows();
    s.gram.noalias() += step.x * step.x.transpose() * step.dt;
    const Vec w = noise_prec * (step.dx + step.alpha * step.dt);
    for (Eigen::Index j = 0; j < d; ++j) {
        s.info.segment(j * d, d) += w(j) * step.x;
    }
    recompute(s, noise_prec);
}

PosteriorState filter_update(const PosteriorState& state, const FilterStep& step, const GameSpec& spec,
                             std::size_t i) {
    PosteriorState next = state;
    filter_update_inplace(next, step, noise_precision(spec.sigma[i]));
    return next;
}

PosteriorState reset_anchor(const PosteriorState& state) {
    PosteriorState s = state;
    s.anchor_mu = s.mu;
    s.anchor_sigma = s.sigma;
    s.anchor_logdet = log_det_spd(s.sigma);
    s.logdet = s.anchor_logdet;
    s.gram.setZero();
    s.info.setZero();
    return s;
}

double det_ratio(const PosteriorState& state) { return std::exp(state.logdet - state.anchor_logdet); }

std::pair<Vec, Mat> bayes_regression_oracle(const Vec& prior_mu, const Mat& prior_sigma,
                                            std::span<const FilterStep> steps, const GameSpec& spec,
                                            std::size_t i) {
    const Eigen::Index d = static_cast<Eigen::Index>(spec.dim);
    const Mat noise_cov = spec.sigma[i] * spec.sigma[i].transpose();
    const Mat prior_prec = prior_sigma.inverse();
    Mat precision = prior_prec;
    Vec shift = prior_prec * prior_mu;
    for (const auto& st : steps) {
        // observation y = H a dt + noise, noise ~ N(0, noise_cov dt), H = I_d (x) x^T
        const Mat h = kron(Mat::Identity(d, d), st.x.transpose());
        const Vec y = st.dx + st.alpha * st.dt;
        const Mat obs_prec = (noise_cov * st.dt).inverse();
        precision += h.transpose() * obs_prec * h * (st.dt * st.dt);
        shift += h.transpose() * obs_prec * y * st.dt;
    }
    const Eigen::LLT<Mat> llt(symmetrize(precision));
    if (llt.info() != Eigen::Success) {
        throw FilterError("bayes_regression_oracle: information matrix is singular");
    }
    const Mat cov = symmetrize(llt.solve(Mat::Identity(precision.rows(), precision.cols())));
    return {cov * shift, cov};
}

}  // namespace tsgame
