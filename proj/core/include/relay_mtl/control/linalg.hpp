#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace relay_mtl::control {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when a kernel receives inputs of incompatible shape.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterative kernel fails (divergence, no convergence, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
Matrix expm(const Matrix& m);

struct DiscretePair {
  Matrix ad;
  Matrix bd;
};

/// Exact zero-order-hold discretization of x' = A x + B u over one period `ts`.
///
/// Computed as the exponential of the augmented block matrix [[A, B], [0, 0]] * ts;
/// the top-left block is e^{A ts} and the top-right block is the integral
/// \int_0^{ts} e^{A s} ds B.
DiscretePair zoh_discretize(const Matrix& a, const Matrix& b, double ts);

struct CareOptions {
  double sign_tolerance = 1e-13;
  int max_sign_iterations = 100;
  int newton_refinements = 2;
};

/// Solves A^T P + P A - 2 P B B^T P + k I = 0 for the stabilizing symmetric P.
///
/// The stable invariant subspace of the Hamiltonian [[A, -2BB^T], [-kI, -A^T]] is
/// extracted with the matrix sign function (Newton iteration with determinant
/// scaling), P is recovered by least squares, then polished with Newton steps on
/// the Riccati residual. Throws NumericalError when the sign iteration does not
/// converge, which is what happens for pairs that are not stabilizable.
Matrix solve_care(const Matrix& a, const Matrix& b, double k, const CareOptions& options = {});

/// Infinity norm (max row sum) of A^T P + P A - 2 P B B^T P + k I.
double care_residual(const Matrix& a, const Matrix& b, double k, const Matrix& p);

struct SingularValueEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Largest singular value by power iteration on M^T M.
SingularValueEstimate max_singular_value(const Matrix& m, double relative_tolerance = 1e-10,
                                         int max_iterations = 100000);

/// Convenience wrapper that throws NumericalError when power iteration does not converge.
double smax(const Matrix& m);

struct EigenExtremes {
  double min = 0.0;
  double max = 0.0;
};

/// Extreme eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
EigenExtremes sym_eig_extremes(const Matrix& p, double symmetry_tolerance = 1e-10,
                               double off_diagonal_tolerance = 1e-11);

/// Spectral radius estimate from Gelfand's formula ||M^(2^s)||^(2^-s) with
/// normalisation at every squaring. Works for non-normal and complex-spectrum matrices.
double spectral_radius(const Matrix& m, int squarings = 12);

using VectorField = std::function<Vector(double t, const Vector& x)>;

/// One classical fourth-order Runge-Kutta step. Throws NumericalError on non-finite derivatives.
Vector rk4_step(const VectorField& f, const Vector& x, double t, double dt);

/// Rank of the controllability matrix [B, AB, ..., A^{n-1}B].
int controllability_rank(const Matrix& a, const Matrix& b, double tolerance = 1e-9);

}  // namespace relay_mtl::control
