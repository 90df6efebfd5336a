#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "qfilter/field.hpp"

namespace qfilter {

using Matrix2cd = Eigen::Matrix2cd;
using MatrixXcd = Eigen::MatrixXcd;

// Coefficients of a 2x2 Hermitian matrix a0 * I + a . sigma.
struct PauliCoeffs {
  double a0 = 0.0;
  Eigen::Vector3d a = Eigen::Vector3d::Zero();

  Matrix2cd to_matrix() const;
};

const Matrix2cd& pauli_x();
const Matrix2cd& pauli_y();
const Matrix2cd& pauli_z();

// Decomposes a 2x2 matrix into Pauli coefficients; throws if it is not
// Hermitian within `tol`.
PauliCoeffs pauli_decompose(const Matrix2cd& m, double tol = 1e-12);

double max_unitarity_defect(const MatrixXcd& u);
double max_hermiticity_defect(const MatrixXcd& h);
void require_hermitian(const MatrixXcd& h, double tol = 1e-12);

// Closed-form exp(-i (a0 I + a.sigma) dt); exactly unitary up to rounding.
Matrix2cd pauli_expm(const PauliCoeffs& h, double dt);

// exp(-i H dt) of a Hermitian matrix via eigendecomposition.
MatrixXcd hermitian_expm(const MatrixXcd& h, double dt);

struct PropagationOptions {
  // Re-propagate with 2x steps and require max-norm agreement <= 1e-8.
  bool richardson_check = false;
  double richardson_tolerance = 1e-8;
};

// Time-ordered propagator over [0, duration] as a product of midpoint-sampled
// step exponentials U = prod_k exp(-i H(t_{k-1/2}) dt); global error O(dt^2),
// unitary by construction.
Matrix2cd propagate_timeordered(const std::function<PauliCoeffs(double)>& h,
                                double duration, int steps,
                                const PropagationOptions& options = {});
MatrixXcd propagate_timeordered(const std::function<MatrixXcd(double)>& h,
                                double duration, int steps,
                                const PropagationOptions& options = {});

// Signal in the frame co-rotating with the control (omega0 / 2) n . sigma:
// rotates s(t) about n by the angle omega0 * t.
Eigen::Vector3d rotate_about_axis(const Eigen::Vector3d& v,
                                  const Eigen::Vector3d& axis, double angle);
Matrix2cd rotating_frame_signal(const FourierField& s, double omega0,
                                const Eigen::Vector3d& axis, double t);

// Closed-form -i int_0^T S(tau) dtau of the rotating-frame signal, evaluated
// term by term from the Fourier coefficients (anti-Hermitian, not unitary).
Matrix2cd first_order_propagator(const FourierField& s, double omega0,
                                 const Eigen::Vector3d& axis, double period);

// Collective spin operators on the (N+1)-dimensional symmetric subspace,
// S = N/2, in the S_z eigenbasis ordered m = S, S-1, ..., -S.
struct CollectiveSpinOps {
  int n_qubits = 0;
  MatrixXcd sx, sy, sz;

  int dim() const { return n_qubits + 1; }
  double total_spin() const { return 0.5 * n_qubits; }
};

CollectiveSpinOps collective_ops(int n_qubits);

}  // namespace qfilter
