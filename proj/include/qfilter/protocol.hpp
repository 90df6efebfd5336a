#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "qfilter/dynamics.hpp"
#include "qfilter/field.hpp"

namespace qfilter {

using Vector4cd = Eigen::Vector4cd;
using Matrix4cd = Eigen::Matrix4cd;

// The six control orientations n = (+-1,0,0), (0,+-1,0), (0,0,+-1).
enum class ControlAxis { plus_x, minus_x, plus_y, minus_y, plus_z, minus_z };

const std::array<ControlAxis, 6>& all_control_axes();
Eigen::Vector3d axis_vector(ControlAxis axis);
const char* axis_name(ControlAxis axis);
ControlAxis axis_from_name(const std::string& name);
// Cartesian index (0,1,2) of the axis line this orientation lies on.
int axis_component(ControlAxis axis);
bool axis_positive(ControlAxis axis);

struct SensorConfig {
  int control_harmonic = 1;  // omega0 = 2*pi*control_harmonic / period, >= 1
  double period = 1.0;
  int steps = 0;  // 0 -> default_step_count over control and field harmonics
  std::vector<ControlAxis> axes{all_control_axes().begin(),
                                all_control_axes().end()};

  double omega0() const;
  void validate() const;
};

// (|10> - |01>) / sqrt(2) in the product basis |00>, |01>, |10>, |11>.
Vector4cd bell_psi_minus();

// H1(t) = (omega0/2) n.sigma + (s(t)+b(t)).sigma on the sensing qubit and
// H2(t) = (omega0/2) n.sigma + b(t).sigma on the reference qubit.
std::pair<std::function<PauliCoeffs(double)>, std::function<PauliCoeffs(double)>>
hamiltonian_pair(const FourierField& s, const FourierField& b, double omega0,
                 ControlAxis axis);

// Rank-1 projectors onto the two even-parity outcomes in the basis aligned
// with the control axis: {++, --} for x, {+i+i, -i-i} for y, {00, 11} for z.
std::pair<Matrix4cd, Matrix4cd> even_parity_projectors(ControlAxis axis);

// Joint measurement along one control orientation. Outcome order is
// (e+,e+), (e+,e-), (e-,e+), (e-,e-) in the eigenbasis of the positive axis;
// the even-parity pair is outcomes 0 and 3.
struct OrientationResponse {
  ControlAxis axis;
  std::array<double, 4> outcome_probabilities{};

  double even_first() const { return outcome_probabilities[0]; }
  double even_second() const { return outcome_probabilities[3]; }
  double even_mean() const { return 0.5 * (even_first() + even_second()); }
  double even_sum() const { return even_first() + even_second(); }
  double outcome_sum() const;
};

// First-order (weak-signal) even-parity probabilities. `averaged` equals
// T^2 |s_w0|^2 / 12 when all six orientations are configured.
struct FirstOrderResponse {
  double averaged = 0.0;
  std::array<double, 3> per_axis{};         // x, y, z axis pairs
  std::array<double, 6> per_orientation{};  // indexed like all_control_axes()

  double for_axis(ControlAxis axis) const;
};

FirstOrderResponse first_order_response(const FourierField& s, double omega0,
                                        double period);

// Appendix-style amplitude-level remainder bound on the first-order
// truncation, in terms of I_s = int |s(t)| dt and I_b = int |b(t)| dt.
double amplitude_error_bound(double integrated_signal,
                             double integrated_background);
// Probability-level bound 2 sqrt(pbar) B + B^2.
double probability_error_bound(double first_order_probability,
                               double amplitude_bound);

struct ResponseResult {
  std::vector<OrientationResponse> per_orientation;
  double response = 0.0;  // mean over orientations of the even-parity mean
  double model = 0.0;     // first-order value over the same orientation set
  double residual = 0.0;  // response - model
  double integrated_signal = 0.0;
  double integrated_background = 0.0;
  double amplitude_bound = 0.0;
  double probability_bound = 0.0;
};

// Exact sensor response: two independent 2x2 propagations per orientation,
// applied to the Bell state, measured in the control-axis product basis.
ResponseResult exact_response(const FourierField& s, const FourierField& b,
                              const SensorConfig& config);

// Appendix-A single-qubit filter: H(t) = omega0 sigma_x / 2 + f(t) sigma_z
// with f one Cartesian component of `field`; exact |<1|U(T)|0>|^2 against the
// model T^2 f_sw0^2 / 4.
struct FilterResponse {
  double exact = 0.0;
  double model = 0.0;
};

FilterResponse single_qubit_filter_response(const FourierField& field,
                                            int component, double omega0,
                                            double period, int steps = 0);

}  // namespace qfilter
