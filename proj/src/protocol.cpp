#include "qfilter/protocol.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qfilter/integrate.hpp"

namespace qfilter {

namespace {

using cplx = std::complex<double>;
using Vector2cd = Eigen::Vector2cd;
constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

// Eigenbasis (e+, e-) of sigma_mu for the Cartesian line of an orientation.
std::array<Vector2cd, 2> measurement_basis(int component) {
  std::array<Vector2cd, 2> basis;
  switch (component) {
    case 0:
      basis[0] << kInvSqrt2, kInvSqrt2;
      basis[1] << kInvSqrt2, -kInvSqrt2;
      break;
    case 1:
      basis[0] << kInvSqrt2, cplx(0.0, kInvSqrt2);
      basis[1] << kInvSqrt2, cplx(0.0, -kInvSqrt2);
      break;
    default:
      basis[0] << 1.0, 0.0;
      basis[1] << 0.0, 1.0;
      break;
  }
  return basis;
}

// |Psi-> reshaped so that out = U1 * M * U2^T is the evolved state with
// row = qubit-1 index.
Matrix2cd bell_matrix() {
  Matrix2cd m;
  m << 0.0, -kInvSqrt2, kInvSqrt2, 0.0;
  return m;
}

Matrix2cd propagate_sampled(const Eigen::Vector3d& control,
                            const std::vector<Eigen::Vector3d>& samples,
                            double dt) {
  Matrix2cd u = Matrix2cd::Identity();
  PauliCoeffs step;
  for (const Eigen::Vector3d& f : samples) {
    step.a = control + f;
    u = pauli_expm(step, dt) * u;
  }
  return u;
}

int resolved_steps(const SensorConfig& config, const FourierField& s,
                   const FourierField& b) {
  if (config.steps > 0) return config.steps;
  const int max_harmonic = std::max(
      {config.control_harmonic, s.max_harmonic(), b.max_harmonic()});
  return default_step_count(max_harmonic);
}

}  // namespace

const std::array<ControlAxis, 6>& all_control_axes() {
  static const std::array<ControlAxis, 6> axes = {
      ControlAxis::plus_x,  ControlAxis::minus_x, ControlAxis::plus_y,
      ControlAxis::minus_y, ControlAxis::plus_z,  ControlAxis::minus_z};
  return axes;
}

Eigen::Vector3d axis_vector(ControlAxis axis) {
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  n[axis_component(axis)] = axis_positive(axis) ? 1.0 : -1.0;
  return n;
}

const char* axis_name(ControlAxis axis) {
  switch (axis) {
    case ControlAxis::plus_x: return "+x";
    case ControlAxis::minus_x: return "-x";
    case ControlAxis::plus_y: return "+y";
    case ControlAxis::minus_y: return "-y";
    case ControlAxis::plus_z: return "+z";
    default: return "-z";
  }
}

ControlAxis axis_from_name(const std::string& name) {
  for (ControlAxis axis : all_control_axes()) {
    if (name == axis_name(axis)) return axis;
  }
  throw std::invalid_argument("unknown control axis '" + name +
                              "' (expected one of +x,-x,+y,-y,+z,-z)");
}

int axis_component(ControlAxis axis) {
  switch (axis) {
    case ControlAxis::plus_x:
    case ControlAxis::minus_x: return 0;
    case ControlAxis::plus_y:
    case ControlAxis::minus_y: return 1;
    default: return 2;
  }
}

bool axis_positive(ControlAxis axis) {
  return axis == ControlAxis::plus_x || axis == ControlAxis::plus_y ||
         axis == ControlAxis::plus_z;
}

double SensorConfig::omega0() const {
  return harmonic_omega(control_harmonic, period);
}

void SensorConfig::validate() const {
  if (control_harmonic < 1) {
    throw std::invalid_argument("control harmonic must be >= 1");
  }
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw std::invalid_argument("period must be positive and finite");
  }
  if (steps < 0) {
    throw std::invalid_argument("steps must be non-negative (0 = auto)");
  }
  if (axes.empty()) {
    throw std::invalid_argument("at least one control axis is required");
  }
}

Vector4cd bell_psi_minus() {
  Vector4cd psi = Vector4cd::Zero();
  psi[1] = -kInvSqrt2;
  psi[2] = kInvSqrt2;
  return psi;
}

std::pair<std::function<PauliCoeffs(double)>, std::function<PauliCoeffs(double)>>
hamiltonian_pair(const FourierField& s, const FourierField& b, double omega0,
                 ControlAxis axis) {
  if (s.period() != b.period()) {
    throw std::invalid_argument(
        "signal and background must share the same period");
  }
  const Eigen::Vector3d control = 0.5 * omega0 * axis_vector(axis);
  auto h1 = [s, b, control](double t) {
    PauliCoeffs c;
    c.a = control + s.evaluate(t) + b.evaluate(t);
    return c;
  };
  auto h2 = [b, control](double t) {
    PauliCoeffs c;
    c.a = control + b.evaluate(t);
    return c;
  };
  return {std::move(h1), std::move(h2)};
}

std::pair<Matrix4cd, Matrix4cd> even_parity_projectors(ControlAxis axis) {
  const auto basis = measurement_basis(axis_component(axis));
  const auto pair_state = [](const Vector2cd& e) {
    Vector4cd v;
    v << e[0] * e[0], e[0] * e[1], e[1] * e[0], e[1] * e[1];
    return v;
  };
  std::pair<Matrix4cd, Matrix4cd> projectors;
  const Vector4cd first = pair_state(basis[0]);
  const Vector4cd second = pair_state(basis[1]);
  projectors.first = first * first.adjoint();
  projectors.second = second * second.adjoint();
  return projectors;
}

double OrientationResponse::outcome_sum() const {
  double total = 0.0;
  for (double p : outcome_probabilities) total += p;
  return total;
}

double FirstOrderResponse::for_axis(ControlAxis axis) const {
  for (std::size_t i = 0; i < all_control_axes().size(); ++i) {
    if (all_control_axes()[i] == axis) return per_orientation[i];
  }
  return 0.0;
}

FirstOrderResponse first_order_response(const FourierField& s, double omega0,
                                        double period) {
  const int harmonic = harmonic_index(omega0, period);
  if (harmonic < 1) {
    throw std::invalid_argument("control harmonic must be >= 1");
  }
  const Eigen::Vector3d sc = s.cosine_coefficient(harmonic);
  const Eigen::Vector3d ss = s.sine_coefficient(harmonic);
  const double t2_8 = period * period / 8.0;

  FirstOrderResponse result;
  for (std::size_t i = 0; i < all_control_axes().size(); ++i) {
    const ControlAxis axis = all_control_axes()[i];
    const int mu = axis_component(axis);
    const int nu = (mu + 1) % 3;
    const int la = (mu + 2) % 3;
    const double sign = axis_positive(axis) ? 1.0 : -1.0;
    // First-order amplitude in the plane perpendicular to the control axis;
    // signs verified against the exact propagation.
    const double alpha = sc[nu] + sign * ss[la];
    const double beta = sc[la] - sign * ss[nu];
    result.per_orientation[i] = t2_8 * (alpha * alpha + beta * beta);
  }
  for (int mu = 0; mu < 3; ++mu) {
    result.per_axis[mu] =
        0.5 * (result.per_orientation[2 * mu] + result.per_orientation[2 * mu + 1]);
  }
  result.averaged =
      (result.per_axis[0] + result.per_axis[1] + result.per_axis[2]) / 3.0;
  return result;
}

double amplitude_error_bound(double integrated_signal,
                             double integrated_background) {
  if (integrated_signal < 0.0 || integrated_background < 0.0) {
    throw std::invalid_argument("integrated field strengths must be >= 0");
  }
  const double ib = integrated_background;
  const double isb = integrated_background + integrated_signal;
  return isb * isb + ib * ib + isb * ib * ib + isb * isb * ib + isb * ib +
         isb * isb * ib * ib;
}

double probability_error_bound(double first_order_probability,
                               double amplitude_bound) {
  return 2.0 * std::sqrt(std::max(0.0, first_order_probability)) *
             amplitude_bound +
         amplitude_bound * amplitude_bound;
}

ResponseResult exact_response(const FourierField& s, const FourierField& b,
                              const SensorConfig& config) {
  config.validate();
  if (s.period() != config.period || b.period() != config.period) {
    throw std::invalid_argument("field periods must match the sensor period");
  }
  if (s.period() != b.period()) {
    throw std::invalid_argument(
        "signal and background must share the same period");
  }

  const int steps = resolved_steps(config, s, b);
  const double dt = config.period / steps;
  const double omega0 = config.omega0();

  // The fields are sampled once on the shared midpoint grid and reused for
  // every orientation; with s = 0 both registers then see bit-identical
  // Hamiltonians and the even-parity amplitudes cancel exactly.
  std::vector<Eigen::Vector3d> sensing(steps), reference(steps);
  for (int k = 0; k < steps; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * dt;
    const Eigen::Vector3d bv = b.evaluate(t);
    reference[k] = bv;
    sensing[k] = s.evaluate(t) + bv;
  }

  const Matrix2cd bell = bell_matrix();
  const FirstOrderResponse model = first_order_response(s, omega0, config.period);

  ResponseResult result;
  result.per_orientation.reserve(config.axes.size());
  double response_sum = 0.0;
  double model_sum = 0.0;
  for (ControlAxis axis : config.axes) {
    const Eigen::Vector3d control = 0.5 * omega0 * axis_vector(axis);
    const Matrix2cd u1 = propagate_sampled(control, sensing, dt);
    const Matrix2cd u2 = propagate_sampled(control, reference, dt);
    const Matrix2cd out = u1 * bell * u2.transpose();
    if (!out.allFinite()) {
      throw std::runtime_error("propagation produced non-finite amplitudes");
    }

    const auto basis = measurement_basis(axis_component(axis));
    OrientationResponse orientation;
    orientation.axis = axis;
    int slot = 0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const cplx amp = basis[i].dot(out * basis[j].conjugate());
        orientation.outcome_probabilities[slot++] = std::norm(amp);
      }
    }
    response_sum += orientation.even_mean();
    model_sum += model.for_axis(axis);
    result.per_orientation.push_back(orientation);
  }

  const double count = static_cast<double>(config.axes.size());
  result.response = response_sum / count;
  result.model = model_sum / count;
  result.residual = result.response - result.model;
  result.integrated_signal = integrated_strength(s, steps);
  result.integrated_background = integrated_strength(b, steps);
  result.amplitude_bound =
      amplitude_error_bound(result.integrated_signal, result.integrated_background);
  result.probability_bound =
      probability_error_bound(result.model, result.amplitude_bound);
  return result;
}

FilterResponse single_qubit_filter_response(const FourierField& field,
                                            int component, double omega0,
                                            double period, int steps) {
  if (component < 0 || component > 2) {
    throw std::invalid_argument("field component index must be 0, 1 or 2");
  }
  const int harmonic = harmonic_index(omega0, period);
  if (harmonic < 1) {
    throw std::invalid_argument("control harmonic must be >= 1");
  }
  if (field.period() != period) {
    throw std::invalid_argument("field period must match the sensor period");
  }
  if (steps <= 0) {
    steps = default_step_count(std::max(harmonic, field.max_harmonic()));
  }

  const auto h = [&](double t) {
    PauliCoeffs c;
    c.a[0] = 0.5 * omega0;
    c.a[2] = field.evaluate(t)[component];
    return c;
  };
  const Matrix2cd u = propagate_timeordered(h, period, steps);

  FilterResponse response;
  response.exact = std::norm(u(1, 0));
  const double f_sine = field.sine_coefficient(harmonic)[component];
  response.model = period * period * f_sine * f_sine / 4.0;
  return response;
}

}  // namespace qfilter
