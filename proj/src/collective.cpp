#include "qfilter/collective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qfilter/integrate.hpp"

namespace qfilter {

namespace {

using cplx = std::complex<double>;

int resolved_collective_steps(int steps, int control_harmonic,
                              const FourierField& s, const FourierField& b) {
  if (steps > 0) return steps;
  const int max_harmonic =
      std::max({control_harmonic, s.max_harmonic(), b.max_harmonic()});
  return default_step_count(max_harmonic);
}

MatrixXcd propagate_collective_sampled(
    const CollectiveSpinOps& ops, const Eigen::Vector3d& control,
    const std::vector<Eigen::Vector3d>& samples, double coupling, double dt) {
  const int d = ops.dim();
  MatrixXcd u = MatrixXcd::Identity(d, d);
  for (const Eigen::Vector3d& f : samples) {
    const Eigen::Vector3d c = control + coupling * f;
    const MatrixXcd h = c[0] * ops.sx + c[1] * ops.sy + c[2] * ops.sz;
    u = hermitian_expm(h, dt) * u;
  }
  return u;
}

// Eigenvectors of S_n as columns, eigenvalue descending (m = S .. -S), so
// column i corresponds to projection m = S - i and a pair (i, j) to the joint
// eigenvalue c = m_i + m_j = N - i - j.
MatrixXcd axis_eigenbasis(ControlAxis axis, int n_qubits) {
  const CollectiveSpinOps ops = collective_ops(n_qubits);
  const Eigen::Vector3d n = axis_vector(axis);
  const MatrixXcd sn = n[0] * ops.sx + n[1] * ops.sy + n[2] * ops.sz;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(sn);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition of the control axis failed");
  }
  // SelfAdjointEigenSolver sorts ascending; reverse the columns.
  return solver.eigenvectors().rowwise().reverse();
}

}  // namespace

TwoRegisterState::TwoRegisterState(int n_qubits, Eigen::VectorXcd amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  if (n_qubits_ < 1) {
    throw std::invalid_argument("register size must be at least one qubit");
  }
  const int d = n_qubits_ + 1;
  if (amps_.size() != static_cast<Eigen::Index>(d) * d) {
    throw std::invalid_argument("amplitude vector has wrong length");
  }
  if (std::abs(amps_.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("state must be normalized");
  }
}

Eigen::Map<const Eigen::MatrixXcd> TwoRegisterState::as_matrix() const {
  // Column-major map of a register-1-major layout: entry (j, i) of the map is
  // amplitude (i, j); transpose where row-major access is needed.
  return Eigen::Map<const Eigen::MatrixXcd>(amps_.data(), dim(), dim());
}

double TwoRegisterState::fidelity(const TwoRegisterState& other) const {
  if (other.n_qubits_ != n_qubits_) {
    throw std::invalid_argument("states have different register sizes");
  }
  return std::abs(amps_.dot(other.amps_));
}

TwoRegisterState initial_entangled_state(int n_qubits) {
  if (n_qubits < 1) {
    throw std::invalid_argument("register size must be at least one qubit");
  }
  const int d = n_qubits + 1;
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d) * d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  // Basis index i carries m = S - i, so |S,m>|S,-m> sits at (i, N - i) and
  // the alternating sign (-1)^(S-m) becomes (-1)^i.
  for (int i = 0; i < d; ++i) {
    amps[static_cast<Eigen::Index>(i) * d + (n_qubits - i)] =
        (i % 2 == 0) ? amp : -amp;
  }
  return TwoRegisterState(n_qubits, std::move(amps));
}

TwoRegisterState collective_propagate(const FourierField& s,
                                      const FourierField& b,
                                      int control_harmonic, ControlAxis axis,
                                      int n_qubits, int steps) {
  if (control_harmonic < 1) {
    throw std::invalid_argument("control harmonic must be >= 1");
  }
  if (s.period() != b.period()) {
    throw std::invalid_argument(
        "signal and background must share the same period");
  }
  const double period = s.period();
  steps = resolved_collective_steps(steps, control_harmonic, s, b);
  const double dt = period / steps;
  const double omega0 = harmonic_omega(control_harmonic, period);

  std::vector<Eigen::Vector3d> sensing(steps), reference(steps);
  for (int k = 0; k < steps; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * dt;
    const Eigen::Vector3d bv = b.evaluate(t);
    reference[k] = bv;
    sensing[k] = s.evaluate(t) + bv;
  }

  const CollectiveSpinOps ops = collective_ops(n_qubits);
  // Per-qubit couplings summed over a register: sum_i (w0/2) n.sigma = w0 n.S
  // and sum_i f.sigma = 2 f.S.
  const Eigen::Vector3d control = omega0 * axis_vector(axis);
  const MatrixXcd u1 =
      propagate_collective_sampled(ops, control, sensing, 2.0, dt);
  const MatrixXcd u2 =
      propagate_collective_sampled(ops, control, reference, 2.0, dt);

  const TwoRegisterState initial = initial_entangled_state(n_qubits);
  const int d = n_qubits + 1;
  const MatrixXcd psi = initial.as_matrix().transpose();  // row = register 1
  const MatrixXcd evolved = u1 * psi * u2.transpose();
  if (!evolved.allFinite()) {
    throw std::runtime_error("collective propagation produced non-finite state");
  }

  Eigen::VectorXcd amps(static_cast<Eigen::Index>(d) * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      amps[static_cast<Eigen::Index>(i) * d + j] = evolved(i, j);
    }
  }
  return TwoRegisterState(n_qubits, std::move(amps));
}

OutcomeProjectorSet::OutcomeProjectorSet(ControlAxis axis, int n_qubits)
    : axis_(axis), n_qubits_(n_qubits),
      basis_(axis_eigenbasis(axis, n_qubits)) {}

std::vector<int> OutcomeProjectorSet::labels() const {
  std::vector<int> labels;
  labels.reserve(2 * n_qubits_ + 1);
  for (int c = -n_qubits_; c <= n_qubits_; ++c) labels.push_back(c);
  return labels;
}

std::vector<double> OutcomeProjectorSet::probabilities(
    const TwoRegisterState& state) const {
  const int d = n_qubits_ + 1;
  const MatrixXcd psi = state.as_matrix().transpose();
  const MatrixXcd rotated = basis_.adjoint() * psi * basis_.conjugate();
  std::vector<double> probs(2 * n_qubits_ + 1, 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const int c = n_qubits_ - i - j;  // m_i + m_j
      probs[c + n_qubits_] += std::norm(rotated(i, j));
    }
  }
  return probs;
}

double OutcomeProjectorSet::probability(const TwoRegisterState& state,
                                        int c) const {
  if (c < -n_qubits_ || c > n_qubits_) {
    throw std::invalid_argument("outcome label out of range");
  }
  return probabilities(state)[c + n_qubits_];
}

Eigen::VectorXcd OutcomeProjectorSet::apply(const Eigen::VectorXcd& amplitudes,
                                            int c) const {
  if (c < -n_qubits_ || c > n_qubits_) {
    throw std::invalid_argument("outcome label out of range");
  }
  const int d = n_qubits_ + 1;
  if (amplitudes.size() != static_cast<Eigen::Index>(d) * d) {
    throw std::invalid_argument("amplitude vector has wrong length");
  }
  MatrixXcd psi(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      psi(i, j) = amplitudes[static_cast<Eigen::Index>(i) * d + j];
    }
  }
  MatrixXcd rotated = basis_.adjoint() * psi * basis_.conjugate();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (n_qubits_ - i - j != c) rotated(i, j) = 0.0;
    }
  }
  const MatrixXcd back = basis_ * rotated * basis_.transpose();
  Eigen::VectorXcd out(static_cast<Eigen::Index>(d) * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      out[static_cast<Eigen::Index>(i) * d + j] = back(i, j);
    }
  }
  return out;
}

Eigen::MatrixXcd OutcomeProjectorSet::materialize(int c) const {
  if (c < -n_qubits_ || c > n_qubits_) {
    throw std::invalid_argument("outcome label out of range");
  }
  const int d = n_qubits_ + 1;
  const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
  MatrixXcd projector = MatrixXcd::Zero(dd, dd);
  for (int i = 0; i < d; ++i) {
    const int j = n_qubits_ - c - i;  // partner index with m_i + m_j = c
    if (j < 0 || j >= d) continue;
    Eigen::VectorXcd pair(dd);
    for (int a = 0; a < d; ++a) {
      for (int bidx = 0; bidx < d; ++bidx) {
        pair[static_cast<Eigen::Index>(a) * d + bidx] =
            basis_(a, i) * basis_(bidx, j);
      }
    }
    projector += pair * pair.adjoint();
  }
  return projector;
}

OutcomeProjectorSet outcome_projectors(ControlAxis axis, int n_qubits) {
  return OutcomeProjectorSet(axis, n_qubits);
}

double detection_probability(const TwoRegisterState& state, ControlAxis axis) {
  const OutcomeProjectorSet set(axis, state.n_qubits());
  const std::vector<double> probs = set.probabilities(state);
  double total = 0.0;
  for (int c = -state.n_qubits(); c <= state.n_qubits(); ++c) {
    if (c != 0) total += probs[c + state.n_qubits()];
  }
  return total;
}

double collective_response(const FourierField& s, const FourierField& b,
                           int control_harmonic, int n_qubits, int steps,
                           const std::vector<ControlAxis>& axes) {
  if (axes.empty()) {
    throw std::invalid_argument("at least one control axis is required");
  }
  double total = 0.0;
  for (ControlAxis axis : axes) {
    const TwoRegisterState state =
        collective_propagate(s, b, control_harmonic, axis, n_qubits, steps);
    total += detection_probability(state, axis);
  }
  return total / static_cast<double>(axes.size());
}

double cfi_from_derivative(double p, double dp) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error(
        "classical Fisher information undefined for p outside (0, 1)");
  }
  return dp * dp / (p * (1.0 - p));
}

double cfi(const std::function<double(double)>& p_of_theta, double theta,
           double dtheta) {
  if (!(dtheta > 0.0)) {
    throw std::invalid_argument("finite-difference width must be positive");
  }
  const double p = p_of_theta(theta);
  const double dp =
      (p_of_theta(theta + dtheta) - p_of_theta(theta - dtheta)) / (2.0 * dtheta);
  return cfi_from_derivative(p, dp);
}

}  // namespace qfilter
