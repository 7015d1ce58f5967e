#include "relay_mtl/control/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace relay_mtl::control {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite entries");
  }
}

// Higham (2005), degree 13.
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

double one_norm(const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

Matrix expm(const Matrix& m) {
  require_square(m, "expm");
  require_finite(m, "expm");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;

  const double norm = one_norm(m);
  int squarings = 0;
  if (norm > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
  }
  const Matrix a = m / std::ldexp(1.0, squarings);
  const Matrix ident = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const auto& b = kPade13;

  const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                         b[3] * a2 + b[1] * ident;
  const Matrix u = a * u_inner;
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                   b[2] * a2 + b[0] * ident;

  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

DiscretePair zoh_discretize(const Matrix& a, const Matrix& b, double ts) {
  require_square(a, "zoh_discretize");
  if (b.rows() != a.rows()) {
    throw DimensionError("zoh_discretize: B has " + std::to_string(b.rows()) +
                         " rows but A is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
  }
  if (!(ts > 0.0)) throw std::invalid_argument("zoh_discretize: sampling period must be positive");

  const Eigen::Index nx = a.rows();
  const Eigen::Index nu = b.cols();
  Matrix aug = Matrix::Zero(nx + nu, nx + nu);
  aug.topLeftCorner(nx, nx) = a * ts;
  aug.topRightCorner(nx, nu) = b * ts;
  const Matrix e = expm(aug);
  return {e.topLeftCorner(nx, nx), e.topRightCorner(nx, nu)};
}

double care_residual(const Matrix& a, const Matrix& b, double k, const Matrix& p) {
  const Eigen::Index n = a.rows();
  const Matrix res = a.transpose() * p + p * a - 2.0 * p * b * b.transpose() * p +
                     k * Matrix::Identity(n, n);
  return res.cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix solve_care(const Matrix& a, const Matrix& b, double k, const CareOptions& options) {
  require_square(a, "solve_care");
  if (b.rows() != a.rows()) throw DimensionError("solve_care: B row count must match A");
  if (!(k > 0.0)) throw std::invalid_argument("solve_care: k must be positive");
  require_finite(a, "solve_care");
  require_finite(b, "solve_care");

  const Eigen::Index n = a.rows();
  const Matrix ident = Matrix::Identity(n, n);
  const Matrix g = 2.0 * b * b.transpose();
  const Matrix q = k * ident;

  Matrix h(2 * n, 2 * n);
  h << a, -g, -q, -a.transpose();

  Matrix z = h;
  const double dim = static_cast<double>(2 * n);
  bool converged = false;
  for (int it = 0; it < options.max_sign_iterations; ++it) {
    Eigen::PartialPivLU<Matrix> lu(z);
    const double det = lu.determinant();
    if (!std::isfinite(det) || det == 0.0) {
      throw NumericalError(
          "solve_care: Hamiltonian has eigenvalues on the imaginary axis; "
          "(A, B) is not stabilizable");
    }
    const double scale = std::pow(std::abs(det), -1.0 / dim);
    const Matrix next = 0.5 * (scale * z + lu.inverse() / scale);
    const double change = one_norm(next - z);
    z = next;
    if (!z.allFinite()) break;
    if (change <= options.sign_tolerance * one_norm(z)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalError("solve_care: sign iteration did not converge; (A, B) is not stabilizable");
  }

  // Stable subspace of H is spanned by [I; P], so (Z + I)[I; P] = 0.
  Matrix lhs(2 * n, n);
  lhs << z.topRightCorner(n, n), z.bottomRightCorner(n, n) + ident;
  Matrix rhs(2 * n, n);
  rhs << -(z.topLeftCorner(n, n) + ident), -z.bottomLeftCorner(n, n);
  Matrix p = lhs.colPivHouseholderQr().solve(rhs);
  p = 0.5 * (p + p.transpose());

  // Newton (Kleinman) refinement: (A - G P)^T X + X (A - G P) = -R(P).
  const Matrix id_n = Matrix::Identity(n, n);
  for (int step = 0; step < options.newton_refinements; ++step) {
    const Matrix acl = a - g * p;
    const Matrix res = a.transpose() * p + p * a - p * g * p + q;
    Matrix kron = Matrix::Zero(n * n, n * n);
    // vec(Acl^T X + X Acl) = (I kron Acl^T + Acl^T kron I) vec(X), column-major vec.
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        kron.block(i * n, j * n, n, n) += id_n(i, j) * acl.transpose();
        kron.block(i * n, j * n, n, n) += acl(j, i) * id_n;
      }
    }
    const Eigen::Map<const Vector> rvec(res.data(), n * n);
    const Vector xvec = kron.partialPivLu().solve(-rvec);
    const Matrix x = Eigen::Map<const Matrix>(xvec.data(), n, n);
    p += 0.5 * (x + x.transpose());
  }
  if (!p.allFinite()) throw NumericalError("solve_care: non-finite solution");
  p = 0.5 * (p + p.transpose()).eval();

  const EigenExtremes ext = sym_eig_extremes(p);
  if (!(ext.min > 0.0)) {
    throw NumericalError("solve_care: solution is not positive definite (lambda_min = " +
                         std::to_string(ext.min) + ")");
  }
  return p;
}

SingularValueEstimate max_singular_value(const Matrix& m, double relative_tolerance,
                                         int max_iterations) {
  require_finite(m, "max_singular_value");
  SingularValueEstimate out;
  if (m.size() == 0) {
    out.converged = true;
    return out;
  }
  const Matrix mtm = m.transpose() * m;
  const Eigen::Index n = mtm.rows();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(static_cast<double>(i + 1));
  v.normalize();

  double lambda = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector w = mtm * v;
    const double next = v.dot(w);
    const double wn = w.norm();
    out.iterations = it;
    if (wn == 0.0) {
      out.value = 0.0;
      out.converged = true;
      return out;
    }
    v = w / wn;
    if (it > 1 && std::abs(next - lambda) <= relative_tolerance * std::abs(next)) {
      lambda = next;
      out.converged = true;
      break;
    }
    lambda = next;
  }
  out.value = std::sqrt(std::max(lambda, 0.0));
  return out;
}

double smax(const Matrix& m) {
  const auto est = max_singular_value(m);
  if (!est.converged) {
    throw NumericalError("max_singular_value: power iteration hit the iteration cap (last estimate " +
                         std::to_string(est.value) + ")");
  }
  return est.value;
}

EigenExtremes sym_eig_extremes(const Matrix& p, double symmetry_tolerance,
                               double off_diagonal_tolerance) {
  require_square(p, "sym_eig_extremes");
  require_finite(p, "sym_eig_extremes");
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > symmetry_tolerance * std::max(1.0, p.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("sym_eig_extremes: matrix is not symmetric");
  }
  const Eigen::Index n = p.rows();
  if (n == 0) return {};
  Matrix s = 0.5 * (p + p.transpose());

  auto off_norm = [&s, n] {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) acc += s(i, j) * s(i, j);
    return std::sqrt(acc);
  };

  const double threshold = off_diagonal_tolerance * std::max(1.0, s.norm());
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_norm() > threshold; ++sweep) {
    for (Eigen::Index i = 0; i < n - 1; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double apq = s(i, j);
        if (apq == 0.0) continue;
        const double theta = (s(j, j) - s(i, i)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double ski = s(k, i);
          const double skj = s(k, j);
          s(k, i) = c * ski - sn * skj;
          s(k, j) = sn * ski + c * skj;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double sik = s(i, k);
          const double sjk = s(j, k);
          s(i, k) = c * sik - sn * sjk;
          s(j, k) = sn * sik + c * sjk;
        }
      }
    }
  }
  const Vector d = s.diagonal();
  return {d.minCoeff(), d.maxCoeff()};
}

double spectral_radius(const Matrix& m, int squarings) {
  require_square(m, "spectral_radius");
  require_finite(m, "spectral_radius");
  double nrm = m.norm();
  if (nrm == 0.0) return 0.0;
  Matrix x = m / nrm;
  double log_norm = std::log(nrm);  // log ||M^(2^s)|| tracked through normalisation
  for (int s = 0; s < squarings; ++s) {
    x = x * x;
    const double xn = x.norm();
    if (xn == 0.0) return 0.0;
    x /= xn;
    log_norm = 2.0 * log_norm + std::log(xn);
  }
  return std::exp(log_norm / std::ldexp(1.0, squarings));
}

Vector rk4_step(const VectorField& f, const Vector& x, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  auto eval = [&f](double tt, const Vector& xx) {
    Vector d = f(tt, xx);
    if (!d.allFinite()) throw NumericalError("rk4_step: non-finite derivative");
    return d;
  };
  const Vector k1 = eval(t, x);
  const Vector k2 = eval(t + 0.5 * dt, x + 0.5 * dt * k1);
  const Vector k3 = eval(t + 0.5 * dt, x + 0.5 * dt * k2);
  const Vector k4 = eval(t + dt, x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

int controllability_rank(const Matrix& a, const Matrix& b, double tolerance) {
  require_square(a, "controllability_rank");
  if (b.rows() != a.rows()) throw DimensionError("controllability_rank: B row count must match A");
  const Eigen::Index n = a.rows();
  Matrix ctrb(n, n * b.cols());
  Matrix block = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    ctrb.middleCols(i * b.cols(), b.cols()) = block;
    block = a * block;
  }
  Eigen::FullPivLU<Matrix> lu(ctrb);
  lu.setThreshold(tolerance);
  return static_cast<int>(lu.rank());
}

}  // namespace relay_mtl::control
