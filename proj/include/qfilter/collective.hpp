#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "qfilter/dynamics.hpp"
#include "qfilter/field.hpp"
#include "qfilter/protocol.hpp"

namespace qfilter {

// Pure state of two spin-S registers (S = N/2), amplitudes indexed
// register-1-major in the S_z product basis with m descending.
class TwoRegisterState {
 public:
  TwoRegisterState(int n_qubits, Eigen::VectorXcd amplitudes);

  int n_qubits() const { return n_qubits_; }
  int dim() const { return n_qubits_ + 1; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  std::complex<double> amplitude(int i, int j) const {
    return amps_[i * dim() + j];
  }
  Eigen::Map<const Eigen::MatrixXcd> as_matrix() const;

  double norm() const { return amps_.norm(); }
  // |<a|b>|, the global-phase-insensitive overlap.
  double fidelity(const TwoRegisterState& other) const;

 private:
  int n_qubits_;
  Eigen::VectorXcd amps_;
};

// (1/sqrt(d)) sum_m (-1)^(S-m) |S,m>|S,-m>; reduces to the Bell singlet at
// N = 1 and is invariant under any joint collective rotation.
TwoRegisterState initial_entangled_state(int n_qubits);

// Evolves register 1 under omega0 n.S + 2(s+b).S and register 2 under
// omega0 n.S + 2 b.S for one period (per-qubit couplings summed into
// collective operators).
TwoRegisterState collective_propagate(const FourierField& s,
                                      const FourierField& b,
                                      int control_harmonic, ControlAxis axis,
                                      int n_qubits, int steps = 0);

// Eigenspace projectors of S_n x I + I x S_n, labelled by the eigenvalue
// c = m + m' in the S_n eigenbasis of the two registers; c runs over all
// attainable values -N..N. Projectors are kept in factored form (the rotated
// basis plus an index partition); materialize() builds the dense d^2 x d^2
// matrix for small N.
class OutcomeProjectorSet {
 public:
  OutcomeProjectorSet(ControlAxis axis, int n_qubits);

  int n_qubits() const { return n_qubits_; }
  ControlAxis axis() const { return axis_; }
  std::vector<int> labels() const;  // -N..N

  double probability(const TwoRegisterState& state, int c) const;
  std::vector<double> probabilities(const TwoRegisterState& state) const;
  // Pi(c) applied to raw amplitudes (register-1 major); the result is
  // generally sub-normalized.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& amplitudes, int c) const;
  Eigen::MatrixXcd materialize(int c) const;

 private:
  ControlAxis axis_;
  int n_qubits_;
  Eigen::MatrixXcd basis_;  // columns: S_n eigenvectors, eigenvalue descending
};

OutcomeProjectorSet outcome_projectors(ControlAxis axis, int n_qubits);

// p(M) for one orientation: total weight on outcomes with c = m + m' != 0.
double detection_probability(const TwoRegisterState& state, ControlAxis axis);

// Orientation-averaged detection probability after exact propagation, the
// collective analogue of the two-qubit averaged response.
double collective_response(const FourierField& s, const FourierField& b,
                           int control_harmonic, int n_qubits, int steps = 0,
                           const std::vector<ControlAxis>& axes = {
                               all_control_axes().begin(),
                               all_control_axes().end()});

// Classical Fisher information (dp/dtheta)^2 / (p (1-p)) with the derivative
// taken by central finite difference; throws if p(theta) is not in (0, 1).
double cfi(const std::function<double(double)>& p_of_theta, double theta,
           double dtheta);
double cfi_from_derivative(double p, double dp);

}  // namespace qfilter
