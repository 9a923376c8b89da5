#pragma once

// Dense linear-algebra helpers used by the game, filtering and controller
// modules. All functions are pure and operate on dynamic-size Eigen types.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace tsgame {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Raised when an input violates a precondition of a linear-algebra routine
/// (shape mismatch, asymmetry, loss of definiteness, instability).
class LinalgError : public std::runtime_error {
public:
    explicit LinalgError(const std::string& what) : std::runtime_error(what) {}
};

/// Row-stacking vectorization: out[j*d + l] = M(j, l).
Vec vectorize(const Mat& m);

/// Inverse of vectorize; the length must be a perfect square.
Mat unvectorize(const Vec& v);

Mat kron(const Mat& a, const Mat& b);

/// True if ||M - M^T||_F <= tol * max(1, ||M||_F).
bool is_symmetric(const Mat& m, double tol = 1e-10);

/// Cholesky succeeds on the symmetrized matrix.
bool is_positive_definite(const Mat& m);

/// Principal square root of a symmetric positive definite matrix via the
/// symmetric eigendecomposition. Throws LinalgError on asymmetric or
/// non-PD input.
Mat sqrt_spd(const Mat& m);

/// Inverse principal square root, same preconditions as sqrt_spd.
Mat inv_sqrt_spd(const Mat& m);

/// log det of an SPD matrix from its Cholesky factor.
double log_det_spd(const Mat& m);

/// Largest real part over the spectrum.
double spectral_abscissa(const Mat& m);

bool is_hurwitz(const Mat& m);

/// Solves F V + V F^T + C = 0 for V through the row-major Kronecker
/// linearization (I (x) F + F (x) I) vec(V) = -vec(C).
/// Throws LinalgError when F is not Hurwitz.
Mat solve_lyapunov(const Mat& f, const Mat& c);

inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

/// Orthogonal projection onto the Frobenius ball of the given radius.
Mat project_frobenius_ball(const Mat& m, double radius);

}  // namespace tsgame
