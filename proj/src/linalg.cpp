#include "tsgame/linalg.hpp"

#include <cmath>

namespace tsgame {

namespace {

Eigen::SelfAdjointEigenSolver<Mat> spd_eigen(const Mat& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw LinalgError(std::string(who) + ": matrix must be square and non-empty");
    }
    if (!is_symmetric(m)) {
        throw LinalgError(std::string(who) + ": matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m));
    if (es.info() != Eigen::Success) {
        throw LinalgError(std::string(who) + ": eigendecomposition failed");
    }
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw LinalgError(std::string(who) + ": matrix is not positive definite");
    }
    return es;
}

}  // namespace

Vec vectorize(const Mat& m) {
    if (m.rows() != m.cols()) {
        throw LinalgError("vectorize: matrix must be square");
    }
    const Eigen::Index d = m.rows();
    Vec out(d * d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index l = 0; l < d; ++l) {
            out(j * d + l) = m(j, l);
        }
    }
    return out;
}

Mat unvectorize(const Vec& v) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size()) {
        throw LinalgError("unvectorize: length " + std::to_string(v.size()) + " is not a perfect square");
    }
    Mat out(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index l = 0; l < d; ++l) {
            out(j, l) = v(j * d + l);
        }
    }
    return out;
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

bool is_symmetric(const Mat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.norm());
    return (m - m.transpose()).norm() <= tol * scale;
}

bool is_positive_definite(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() == 0) return false;
    Eigen::LLT<Mat> llt(symmetrize(m));
    return llt.info() == Eigen::Success;
}

Mat sqrt_spd(const Mat& m) {
    const auto es = spd_eigen(m, "sqrt_spd");
    const Mat& u = es.eigenvectors();
    return symmetrize(u * es.eigenvalues().cwiseSqrt().asDiagonal() * u.transpose());
}

Mat inv_sqrt_spd(const Mat& m) {
    const auto es = spd_eigen(m, "inv_sqrt_spd");
    const Mat& u = es.eigenvectors();
    return symmetrize(u * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose());
}

double log_det_spd(const Mat& m) {
    Eigen::LLT<Mat> llt(symmetrize(m));
    if (llt.info() != Eigen::Success) {
        throw LinalgError("log_det_spd: matrix is not positive definite");
    }
    const Mat& l = llt.matrixLLT();
    return 2.0 * l.diagonal().array().log().sum();
}

double spectral_abscissa(const Mat& m) {
    if (m.rows() != m.cols()) {
        throw LinalgError("spectral_abscissa: matrix must be square");
    }
    Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        throw LinalgError("spectral_abscissa: eigenvalue computation failed");
    }
    return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Mat& m) { return spectral_abscissa(m) < 0.0; }

Mat solve_lyapunov(const Mat& f, const Mat& c) {
    if (f.rows() != f.cols() || c.rows() != f.rows() || c.cols() != f.cols()) {
        throw LinalgError("solve_lyapunov: dimension mismatch");
    }
    if (!is_hurwitz(f)) {
        throw LinalgError("solve_lyapunov: F is not Hurwitz, no stable solution");
    }
    const Eigen::Index d = f.rows();
    const Mat id = Mat::Identity(d, d);
    const Mat op = kron(id, f) + kron(f, id);
    const Vec rhs = -vectorize(c);
    const Vec v = op.partialPivLu().solve(rhs);
    return symmetrize(unvectorize(v));
}

Mat project_frobenius_ball(const Mat& m, double radius) {
    const double n = m.norm();
    if (n <= radius || n == 0.0) return m;
    return m * (radius / n);
}

}  // namespace tsgame
