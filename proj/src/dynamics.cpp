#include "qfilter/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qfilter/integrate.hpp"

namespace qfilter {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

Matrix2cd make_pauli(cplx m00, cplx m01, cplx m10, cplx m11) {
  Matrix2cd m;
  m << m00, m01, m10, m11;
  return m;
}

}  // namespace

const Matrix2cd& pauli_x() {
  static const Matrix2cd m = make_pauli(0, 1, 1, 0);
  return m;
}

const Matrix2cd& pauli_y() {
  static const Matrix2cd m = make_pauli(0, -kI, kI, 0);
  return m;
}

const Matrix2cd& pauli_z() {
  static const Matrix2cd m = make_pauli(1, 0, 0, -1);
  return m;
}

Matrix2cd PauliCoeffs::to_matrix() const {
  Matrix2cd m;
  m << cplx(a0 + a[2], 0.0), cplx(a[0], -a[1]),
       cplx(a[0], a[1]), cplx(a0 - a[2], 0.0);
  return m;
}

PauliCoeffs pauli_decompose(const Matrix2cd& m, double tol) {
  if (max_hermiticity_defect(m) > tol) {
    throw std::invalid_argument("matrix is not Hermitian");
  }
  PauliCoeffs c;
  c.a0 = 0.5 * (m(0, 0).real() + m(1, 1).real());
  c.a[0] = 0.5 * (m(0, 1).real() + m(1, 0).real());
  c.a[1] = 0.5 * (m(1, 0).imag() - m(0, 1).imag());
  c.a[2] = 0.5 * (m(0, 0).real() - m(1, 1).real());
  return c;
}

double max_unitarity_defect(const MatrixXcd& u) {
  const MatrixXcd defect =
      u.adjoint() * u - MatrixXcd::Identity(u.rows(), u.cols());
  return defect.cwiseAbs().maxCoeff();
}

double max_hermiticity_defect(const MatrixXcd& h) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

void require_hermitian(const MatrixXcd& h, double tol) {
  if (h.rows() != h.cols()) {
    throw std::invalid_argument("Hamiltonian sample is not square");
  }
  if (!h.allFinite()) {
    throw std::invalid_argument("Hamiltonian sample has non-finite entries");
  }
  if (max_hermiticity_defect(h) > tol) {
    throw std::invalid_argument("Hamiltonian sample is not Hermitian");
  }
}

Matrix2cd pauli_expm(const PauliCoeffs& h, double dt) {
  if (!std::isfinite(dt) || !std::isfinite(h.a0) || !h.a.allFinite()) {
    throw std::invalid_argument("pauli_expm requires finite inputs");
  }
  const double norm = h.a.norm();
  const cplx phase = std::exp(-kI * h.a0 * dt);
  if (norm == 0.0) {
    return phase * Matrix2cd::Identity();
  }
  const double angle = norm * dt;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Eigen::Vector3d n = h.a / norm;
  Matrix2cd m;
  m << cplx(c, -s * n[2]), cplx(-s * n[1], -s * n[0]),
       cplx(s * n[1], -s * n[0]), cplx(c, s * n[2]);
  return phase * m;
}

MatrixXcd hermitian_expm(const MatrixXcd& h, double dt) {
  require_hermitian(h);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  const Eigen::VectorXd& evals = solver.eigenvalues();
  const MatrixXcd& vecs = solver.eigenvectors();
  Eigen::VectorXcd phases(evals.size());
  for (Eigen::Index j = 0; j < evals.size(); ++j) {
    phases[j] = std::exp(-kI * evals[j] * dt);
  }
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

namespace {

template <class Mat, class StepFn>
Mat midpoint_product(const StepFn& step, double duration, int steps, int dim) {
  if (steps < 1) {
    throw std::invalid_argument("propagation needs at least one step");
  }
  const double dt = duration / steps;
  Mat u = Mat::Identity(dim, dim);
  for (int k = 0; k < steps; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * dt;
    u = step(t, dt) * u;
  }
  return u;
}

template <class Mat, class StepFn>
Mat propagate_with_options(const StepFn& step, double duration, int steps,
                           int dim, const PropagationOptions& options) {
  Mat u = midpoint_product<Mat>(step, duration, steps, dim);
  if (options.richardson_check) {
    const Mat refined = midpoint_product<Mat>(step, duration, 2 * steps, dim);
    const double diff = (refined - u).cwiseAbs().maxCoeff();
    if (diff > options.richardson_tolerance) {
      throw std::runtime_error(
          "propagator not converged: step-halving difference " +
          std::to_string(diff));
    }
  }
  if (max_unitarity_defect(u) > 1e-10) {
    throw std::runtime_error("propagator lost unitarity");
  }
  return u;
}

}  // namespace

Matrix2cd propagate_timeordered(const std::function<PauliCoeffs(double)>& h,
                                double duration, int steps,
                                const PropagationOptions& options) {
  const auto step = [&](double t, double dt) { return pauli_expm(h(t), dt); };
  return propagate_with_options<Matrix2cd>(step, duration, steps, 2, options);
}

MatrixXcd propagate_timeordered(const std::function<MatrixXcd(double)>& h,
                                double duration, int steps,
                                const PropagationOptions& options) {
  if (steps < 1) {
    throw std::invalid_argument("propagation needs at least one step");
  }
  const MatrixXcd probe = h(0.5 * duration / steps);
  const int dim = static_cast<int>(probe.rows());
  const auto step = [&](double t, double dt) {
    const MatrixXcd sample = h(t);
    require_hermitian(sample);
    return hermitian_expm(sample, dt);
  };
  return propagate_with_options<MatrixXcd>(step, duration, steps, dim, options);
}

Eigen::Vector3d rotate_about_axis(const Eigen::Vector3d& v,
                                  const Eigen::Vector3d& axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return v * c + axis.cross(v) * s + axis * (axis.dot(v)) * (1.0 - c);
}

Matrix2cd rotating_frame_signal(const FourierField& s, double omega0,
                                const Eigen::Vector3d& axis, double t) {
  if (std::abs(axis.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("control axis must be a unit vector");
  }
  const Eigen::Vector3d rotated =
      rotate_about_axis(s.evaluate(t), axis, omega0 * t);
  PauliCoeffs c;
  c.a = rotated;
  return c.to_matrix();
}

Matrix2cd first_order_propagator(const FourierField& s, double omega0,
                                 const Eigen::Vector3d& axis, double period) {
  if (std::abs(axis.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("control axis must be a unit vector");
  }
  const int harmonic = harmonic_index(omega0, period);
  const double half = 0.5 * period;

  // Term-by-term integrals over one period: cos(w0 t) picks the cosine
  // coefficient at w0, sin(w0 t) the sine coefficient, and the (1 - cos)
  // projector term keeps the constant offset plus the w0 cosine part.
  Eigen::Vector3d cos_part = Eigen::Vector3d::Zero();
  Eigen::Vector3d sin_cross = Eigen::Vector3d::Zero();
  if (harmonic == 0) {
    cos_part = period * s.cosine_coefficient(0);
  } else {
    cos_part = half * s.cosine_coefficient(harmonic);
    sin_cross = half * axis.cross(s.sine_coefficient(harmonic));
  }
  const Eigen::Vector3d constant_part = period * s.cosine_coefficient(0);
  const Eigen::Vector3d projector =
      axis * axis.dot(constant_part - cos_part);

  PauliCoeffs integral;
  integral.a = cos_part + sin_cross + projector;
  return -kI * integral.to_matrix();
}

CollectiveSpinOps collective_ops(int n_qubits) {
  if (n_qubits < 1) {
    throw std::invalid_argument("collective operators need at least one qubit");
  }
  const int d = n_qubits + 1;
  const double spin = 0.5 * n_qubits;

  // Basis ordered m = S, S-1, ..., -S; ladder elements
  // S+|S,m> = sqrt(S(S+1) - m(m+1)) |S,m+1>.
  MatrixXcd sp = MatrixXcd::Zero(d, d);
  MatrixXcd sz = MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const double m = spin - i;
    sz(i, i) = m;
    if (i > 0) {
      sp(i - 1, i) = std::sqrt(spin * (spin + 1.0) - m * (m + 1.0));
    }
  }
  CollectiveSpinOps ops;
  ops.n_qubits = n_qubits;
  ops.sx = 0.5 * (sp + sp.adjoint());
  ops.sy = -0.5 * kI * (sp - sp.adjoint());
  ops.sz = sz;
  return ops;
}

}  // namespace qfilter
