#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qfilter/dynamics.hpp"
#include "qfilter/field.hpp"
#include "qfilter/protocol.hpp"
#include "qfilter/rng.hpp"

using namespace qfilter;

namespace {

constexpr double kPi = std::numbers::pi;
const std::complex<double> kI{0.0, 1.0};

FourierField sin_signal(double period, int harmonic, double amplitude,
                        int component = 2) {
  FourierTerm term;
  term.harmonic = harmonic;
  term.sine[component] = amplitude;
  return FourierField(period, {term});
}

SensorConfig default_config(int harmonic = 5) {
  SensorConfig config;
  config.control_harmonic = harmonic;
  config.period = 1.0;
  return config;
}

Matrix2cd propagate_background(const FourierField& b, double omega0,
                               ControlAxis axis, int steps) {
  const auto pair = hamiltonian_pair(FourierField(b.period()), b, omega0, axis);
  return propagate_timeordered(pair.second, b.period(), steps);
}

}  // namespace

TEST_CASE("bell_psi_minus components and overlaps") {
  const Vector4cd psi = bell_psi_minus();
  CHECK(std::abs(psi[2] - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(psi[1] + 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(psi[0]) == 0.0);
  CHECK(std::abs(psi[3]) == 0.0);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-15));

  // The singlet is orthogonal to every same-outcome product state.
  for (ControlAxis axis : all_control_axes()) {
    const auto [p1, p2] = even_parity_projectors(axis);
    CHECK(std::abs(psi.dot(p1 * psi)) < 1e-15);
    CHECK(std::abs(psi.dot(p2 * psi)) < 1e-15);
  }
}

TEST_CASE("control axes") {
  CHECK(all_control_axes().size() == 6);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (ControlAxis axis : all_control_axes()) {
    CHECK(axis_vector(axis).norm() == doctest::Approx(1.0));
    CHECK(axis_from_name(axis_name(axis)) == axis);
    sum += axis_vector(axis);
  }
  CHECK(sum.norm() < 1e-15);
  CHECK_THROWS_AS(axis_from_name("north"), std::invalid_argument);
}

TEST_CASE("hamiltonian_pair") {
  const FourierField s = sin_signal(1.0, 3, 0.4);
  const FourierField b =
      FourierField::random(8, std::vector<int>{1, 2}, 0.7, 1.0);
  const double omega0 = harmonic_omega(3, 1.0);
  const auto [h1, h2] = hamiltonian_pair(s, b, omega0, ControlAxis::plus_y);

  for (double t : {0.0, 0.31, 0.77}) {
    // H1 - H2 = s(t) . sigma.
    const Eigen::Vector3d diff = h1(t).a - h2(t).a;
    CHECK((diff - s.evaluate(t)).norm() < 1e-14);
  }

  // Zero signal collapses the pair.
  const auto [z1, z2] =
      hamiltonian_pair(FourierField(1.0), b, omega0, ControlAxis::plus_y);
  for (double t : {0.11, 0.5}) {
    CHECK((z1(t).a - z2(t).a).norm() == 0.0);
  }

  // Zero background leaves only the static control on qubit 2.
  const auto [c1, c2] =
      hamiltonian_pair(s, FourierField(1.0), omega0, ControlAxis::plus_y);
  const Eigen::Vector3d control = 0.5 * omega0 * Eigen::Vector3d(0, 1, 0);
  for (double t : {0.0, 0.42, 0.9}) {
    CHECK((c2(t).a - control).norm() == 0.0);
  }

  CHECK_THROWS_AS(
      hamiltonian_pair(FourierField(1.0), FourierField(2.0), omega0,
                       ControlAxis::plus_x),
      std::invalid_argument);
}

TEST_CASE("even_parity_projectors") {
  const Vector4cd psi = bell_psi_minus();
  for (ControlAxis axis : all_control_axes()) {
    const auto [p1, p2] = even_parity_projectors(axis);
    CHECK((p1 * p1 - p1).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((p2 * p2 - p2).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(p1.trace().real() == doctest::Approx(1.0));
    CHECK(p2.trace().real() == doctest::Approx(1.0));
    CHECK((p1 * psi).norm() < 1e-15);
    CHECK((p2 * psi).norm() < 1e-15);
  }

  const auto [z1, z2] = even_parity_projectors(ControlAxis::plus_z);
  CHECK(std::abs(z1(0, 0) - 1.0) < 1e-15);
  CHECK(z1.cwiseAbs().sum() == doctest::Approx(1.0));
  CHECK(std::abs(z2(3, 3) - 1.0) < 1e-15);
  CHECK(z2.cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("zero signal: every even-parity probability vanishes") {
  SplitMix64 rng(41);
  const FourierField zero(1.0);
  const SensorConfig config = default_config();
  for (int trial = 0; trial < 25; ++trial) {
    const FourierField background = FourierField::random(
        rng.next_u64(), std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 1.0,
        1.0);
    const ResponseResult result = exact_response(zero, background, config);
    for (const OrientationResponse& orientation : result.per_orientation) {
      CHECK(orientation.even_first() <= 1e-10);
      CHECK(orientation.even_second() <= 1e-10);
    }
  }
}

TEST_CASE("ricochet identity: background-only evolution fixes the singlet") {
  SplitMix64 rng(43);
  const double omega0 = harmonic_omega(4, 1.0);
  const Vector4cd psi = bell_psi_minus();
  for (int trial = 0; trial < 20; ++trial) {
    const FourierField b = FourierField::random(
        rng.next_u64(), std::vector<int>{1, 3, 5, 7}, 1.5, 1.0);
    for (ControlAxis axis : {ControlAxis::plus_x, ControlAxis::minus_y,
                             ControlAxis::plus_z}) {
      const Matrix2cd u = propagate_background(b, omega0, axis, 1024);
      // sigma_y U^T = U^dagger sigma_y for this generator family.
      const Matrix2cd lhs = Matrix2cd(pauli_y()) * u.transpose();
      const Matrix2cd rhs = u.adjoint() * Matrix2cd(pauli_y());
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);

      Matrix4cd joint;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          joint.block<2, 2>(2 * i, 2 * j) = u(i, j) * u;
        }
      }
      const Vector4cd evolved = joint * psi;
      CHECK(std::abs(psi.dot(evolved)) == doctest::Approx(1.0).epsilon(1e-9));
      // Equality up to global phase.
      const std::complex<double> phase = psi.dot(evolved);
      CHECK((evolved - phase * psi).norm() < 1e-9);
    }
  }
}

TEST_CASE("first_order_response closed forms") {
  const double period = 1.0;
  const double amplitude = 0.3;
  const double omega0 = harmonic_omega(5, period);
  const FourierField s = sin_signal(period, 5, amplitude);

  const FirstOrderResponse model = first_order_response(s, omega0, period);
  const double t2a2 = period * period * amplitude * amplitude;
  CHECK(model.averaged == doctest::Approx(t2a2 / 12.0).epsilon(1e-12));
  CHECK(model.per_axis[0] == doctest::Approx(t2a2 / 8.0).epsilon(1e-12));
  CHECK(model.per_axis[1] == doctest::Approx(t2a2 / 8.0).epsilon(1e-12));
  CHECK(model.per_axis[2] == doctest::Approx(0.0).epsilon(1e-15));

  // Support away from the control frequency gives zero.
  const FourierField off = sin_signal(period, 2, amplitude);
  CHECK(first_order_response(off, omega0, period).averaged == 0.0);

  // Quadratic homogeneity.
  const FourierField doubled = s.scaled(2.0);
  CHECK(first_order_response(doubled, omega0, period).averaged ==
        doctest::Approx(4.0 * model.averaged).epsilon(1e-12));
}

TEST_CASE("first_order_response averaged value equals T^2 |s_w0|^2 / 12") {
  SplitMix64 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const FourierField s = FourierField::random(
        rng.next_u64(), std::vector<int>{1, 2, 3, 4, 5}, 0.8, 1.0);
    const double omega0 = harmonic_omega(3, 1.0);
    const double weight = s.harmonic_norm(3);
    const FirstOrderResponse model = first_order_response(s, omega0, 1.0);
    CHECK(model.averaged ==
          doctest::Approx(weight * weight / 12.0).epsilon(1e-12));
  }
}

TEST_CASE("per-orientation first order matches the exact propagation") {
  // Signs of the +-mu formulas are pinned by the exact dynamics.
  SplitMix64 rng(53);
  SensorConfig config = default_config(5);
  for (int trial = 0; trial < 10; ++trial) {
    const FourierField s = FourierField::random(
        rng.next_u64(), std::vector<int>{4, 5, 6}, 0.015, 1.0);
    const ResponseResult exact = exact_response(s, FourierField(1.0), config);
    const FirstOrderResponse model =
        first_order_response(s, config.omega0(), config.period);
    for (std::size_t i = 0; i < exact.per_orientation.size(); ++i) {
      const OrientationResponse& orientation = exact.per_orientation[i];
      const double predicted = model.for_axis(orientation.axis);
      const double budget = probability_error_bound(
          predicted, amplitude_error_bound(exact.integrated_signal, 0.0));
      CHECK(std::abs(orientation.even_mean() - predicted) <= budget);
      // The mismatched sign convention would misattribute +mu and -mu; rule
      // it out whenever the two orientations differ measurably.
      const ControlAxis partner =
          all_control_axes()[i % 2 == 0 ? i + 1 : i - 1];
      const double swapped = model.for_axis(partner);
      if (std::abs(swapped - predicted) > 4.0 * budget) {
        CHECK(std::abs(orientation.even_mean() - swapped) > budget);
      }
    }
  }
}

TEST_CASE("exact_response of a resonant sinusoid") {
  SensorConfig config = default_config(5);
  const FourierField zero(1.0);
  for (double amplitude : {0.05, 0.1}) {
    const FourierField s = sin_signal(1.0, 5, amplitude);
    const ResponseResult result = exact_response(s, zero, config);
    const double model = amplitude * amplitude / 12.0;
    CHECK(result.model == doctest::Approx(model).epsilon(1e-12));
    CHECK(std::abs(result.response - model) <=
          amplitude * amplitude * amplitude);
    CHECK(std::abs(result.residual) <= result.probability_bound);
  }
}

TEST_CASE("outcome symmetry and parity completeness") {
  SplitMix64 rng(59);
  SensorConfig config = default_config(3);
  for (int trial = 0; trial < 10; ++trial) {
    const FourierField s = FourierField::random(
        rng.next_u64(), std::vector<int>{2, 3, 4}, 0.04, 1.0);
    const FourierField b = FourierField::random(
        rng.next_u64(), std::vector<int>{1, 2, 5}, 0.04, 1.0);
    const ResponseResult result = exact_response(s, b, config);
    for (const OrientationResponse& orientation : result.per_orientation) {
      CHECK(orientation.outcome_sum() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(std::abs(orientation.even_first() - orientation.even_second()) <=
            result.probability_bound);
      for (double p : orientation.outcome_probabilities) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("first-order consistency for weak signals") {
  SplitMix64 rng(61);
  SensorConfig config = default_config(4);
  const FourierField zero(1.0);
  for (int trial = 0; trial < 25; ++trial) {
    FourierField s = FourierField::random(
        rng.next_u64(), std::vector<int>{1, 3, 4, 6}, 0.02, 1.0);
    if (integrated_strength(s) > 0.05) {
      s = s.scaled(0.05 / integrated_strength(s));
    }
    const ResponseResult result = exact_response(s, zero, config);
    CHECK(std::abs(result.residual) <= result.probability_bound);
  }
}

TEST_CASE("error bounds") {
  CHECK(amplitude_error_bound(0.0, 0.0) == 0.0);
  CHECK(amplitude_error_bound(0.1, 0.1) == doctest::Approx(0.0764).epsilon(1e-12));
  CHECK_THROWS_AS(amplitude_error_bound(-0.1, 0.0), std::invalid_argument);

  // Monotone non-decreasing in each argument.
  SplitMix64 rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    const double is = rng.next_unit();
    const double ib = rng.next_unit();
    const double step = 0.3 * rng.next_unit();
    CHECK(amplitude_error_bound(is + step, ib) >= amplitude_error_bound(is, ib));
    CHECK(amplitude_error_bound(is, ib + step) >= amplitude_error_bound(is, ib));
  }

  const double bound = amplitude_error_bound(0.2, 0.1);
  CHECK(probability_error_bound(0.01, bound) ==
        doctest::Approx(2.0 * 0.1 * bound + bound * bound).epsilon(1e-12));
}

TEST_CASE("single qubit filter") {
  const double period = 1.0;
  const double omega0 = harmonic_omega(5, period);

  const FilterResponse zero =
      single_qubit_filter_response(FourierField(period), 2, omega0, period);
  CHECK(zero.exact <= 1e-20);
  CHECK(zero.model == 0.0);

  for (double amplitude : {0.1, 0.2}) {
    const FourierField f = sin_signal(period, 5, amplitude);
    const FilterResponse r =
        single_qubit_filter_response(f, 2, omega0, period);
    CHECK(r.model == doctest::Approx(amplitude * amplitude / 4.0).epsilon(1e-12));
    const double strength = integrated_strength(f);
    CHECK(std::abs(r.exact - r.model) <= strength * strength * strength);
  }

  // Support only away from w0: model zero, exact suppressed cubically.
  const FourierField off = sin_signal(period, 2, 0.2);
  const FilterResponse r = single_qubit_filter_response(off, 2, omega0, period);
  CHECK(r.model == 0.0);
  const double strength = integrated_strength(off);
  CHECK(r.exact <= strength * strength * strength);
}

TEST_CASE("config validation and error paths") {
  SensorConfig config = default_config();
  config.control_harmonic = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  SensorConfig no_axes = default_config();
  no_axes.axes.clear();
  CHECK_THROWS_AS(
      exact_response(FourierField(1.0), FourierField(1.0), no_axes),
      std::invalid_argument);

  SensorConfig mismatched = default_config();
  CHECK_THROWS_AS(
      exact_response(FourierField(2.0), FourierField(1.0), mismatched),
      std::invalid_argument);
}
