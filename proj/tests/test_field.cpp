#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "qfilter/field.hpp"
#include "qfilter/integrate.hpp"
#include "qfilter/io.hpp"
#include "qfilter/rng.hpp"

using namespace qfilter;

namespace {

constexpr double kPi = std::numbers::pi;

FourierField sin_z(double period, int harmonic, double amplitude) {
  FourierTerm term;
  term.harmonic = harmonic;
  term.sine = Eigen::Vector3d(0.0, 0.0, amplitude);
  return FourierField(period, {term});
}

}  // namespace

TEST_CASE("evaluate reproduces the real Fourier basis") {
  const FourierField field = sin_z(1.0, 1, 1.0);
  CHECK(field.evaluate(0.25).isApprox(Eigen::Vector3d(0, 0, 1), 1e-12));
  CHECK(field.evaluate(0.0).norm() == doctest::Approx(0.0).epsilon(1e-15));

  FourierTerm cos_term;
  cos_term.harmonic = 2;
  cos_term.cosine = Eigen::Vector3d(1.0, 0.0, 0.0);
  const FourierField cos_field(1.0, {cos_term});
  CHECK(cos_field.evaluate(0.5).isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
}

TEST_CASE("evaluate is periodic to machine precision") {
  const FourierField field =
      FourierField::random(99, std::vector<int>{1, 3, 4, 7}, 1.3, 2.0);
  for (double t : {0.13, 0.77, 1.91}) {
    CHECK((field.evaluate(t) - field.evaluate(t + field.period())).norm() <
          1e-12);
  }
}

TEST_CASE("term validation") {
  FourierTerm bad;
  bad.harmonic = 0;
  bad.sine = Eigen::Vector3d(0, 0, 1);
  CHECK_THROWS_AS(FourierField(1.0, {bad}), std::invalid_argument);

  FourierTerm a, b;
  a.harmonic = 2;
  b.harmonic = 2;
  CHECK_THROWS_AS(FourierField(1.0, {a, b}), std::invalid_argument);

  FourierTerm inf_term;
  inf_term.harmonic = 1;
  inf_term.cosine = Eigen::Vector3d(std::nan(""), 0, 0);
  CHECK_THROWS_AS(FourierField(1.0, {inf_term}), std::invalid_argument);
}

TEST_CASE("fourier_coefficient orthogonality on callables") {
  const auto f = [](double t) { return std::sin(2.0 * kPi * t); };
  CHECK(fourier_coefficient(f, 2.0 * kPi, TrigKind::sine, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fourier_coefficient(f, 4.0 * kPi, TrigKind::sine, 1.0) ==
        doctest::Approx(0.0).epsilon(1e-12));

  const auto g = [](double t) { return 0.3 * std::cos(6.0 * kPi * t); };
  CHECK(fourier_coefficient(g, 6.0 * kPi, TrigKind::cosine, 1.0) ==
        doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("fourier_coefficient recovers constants at harmonic zero") {
  const auto f = [](double) { return 0.7; };
  CHECK(fourier_coefficient(f, 0.0, TrigKind::cosine, 1.0) ==
        doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fourier_coefficient(f, 0.0, TrigKind::sine, 1.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fourier_coefficient rejects incommensurate frequencies") {
  const auto f = [](double) { return 1.0; };
  CHECK_THROWS_AS(fourier_coefficient(f, 3.0, TrigKind::sine, 1.0),
                  std::invalid_argument);
  const FourierField field = sin_z(1.0, 1, 1.0);
  CHECK_THROWS_AS(fourier_coefficient(field, 2, 3.0, TrigKind::sine),
                  std::invalid_argument);
}

TEST_CASE("coefficient lookup round-trips through evaluation") {
  const FourierField field =
      FourierField::random(4321, std::vector<int>{0, 1, 2, 5, 9}, 0.8, 1.5);
  for (const FourierTerm& term : field.terms()) {
    const double omega = harmonic_omega(term.harmonic, field.period());
    for (int component = 0; component < 3; ++component) {
      const auto slice = [&](double t) {
        return field.evaluate(t)[component];
      };
      if (term.harmonic > 0) {
        CHECK(fourier_coefficient(slice, omega, TrigKind::sine, 1.5) ==
              doctest::Approx(term.sine[component]).epsilon(1e-10));
      }
      CHECK(fourier_coefficient(slice, omega, TrigKind::cosine, 1.5) ==
            doctest::Approx(term.cosine[component]).epsilon(1e-10));
      CHECK(fourier_coefficient(field, component, omega, TrigKind::sine) ==
            term.sine[component]);
      CHECK(fourier_coefficient(field, component, omega, TrigKind::cosine) ==
            term.cosine[component]);
    }
  }
}

TEST_CASE("random_field normalization and determinism") {
  const std::vector<int> support{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const FourierField a = FourierField::random(11, support, 0.5, 1.0);
  CHECK(a.coefficient_norm() == doctest::Approx(0.5).epsilon(1e-12));

  const FourierField b = FourierField::random(11, support, 0.5, 1.0);
  for (std::size_t i = 0; i < a.terms().size(); ++i) {
    CHECK(a.terms()[i].sine == b.terms()[i].sine);
    CHECK(a.terms()[i].cosine == b.terms()[i].cosine);
  }

  const FourierField zero = FourierField::random(11, support, 0.0, 1.0);
  CHECK(zero.is_zero());
  CHECK_THROWS_AS(FourierField::random(11, support, -1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(FourierField::random(11, std::vector<int>{}, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("random_field is independent of support enumeration order") {
  const std::vector<int> forward{1, 3, 5, 7};
  const std::vector<int> shuffled{5, 1, 7, 3};
  const FourierField a = FourierField::random(7, forward, 0.4, 1.0);
  const FourierField b = FourierField::random(7, shuffled, 0.4, 1.0);
  for (std::size_t i = 0; i < a.terms().size(); ++i) {
    CHECK(a.terms()[i].sine == b.terms()[i].sine);
    CHECK(a.terms()[i].cosine == b.terms()[i].cosine);
  }
}

TEST_CASE("integrated_strength") {
  FourierTerm constant;
  constant.harmonic = 0;
  constant.cosine = Eigen::Vector3d(0.0, 0.0, 2.5);
  const FourierField const_field(2.0, {constant});
  CHECK(integrated_strength(const_field) == doctest::Approx(5.0).epsilon(1e-12));

  // High-resolution quadrature oracle for int_0^1 |sin(2 pi t)| dt = 2/pi.
  const FourierField wave = sin_z(1.0, 1, 1.0);
  const double oracle = midpoint_integral(
      [&](double t) { return wave.evaluate(t).norm(); }, 1.0, 1 << 20);
  CHECK(oracle == doctest::Approx(2.0 / kPi).epsilon(1e-9));
  CHECK(integrated_strength(wave) == doctest::Approx(oracle).epsilon(1e-5));

  CHECK(integrated_strength(FourierField(1.0)) == 0.0);
}

TEST_CASE("triangle inequality bound on a grid") {
  const FourierField field =
      FourierField::random(5, std::vector<int>{1, 2, 6}, 2.2, 1.0);
  double bound = 0.0;
  for (const FourierTerm& term : field.terms()) {
    bound += term.sine.norm() + term.cosine.norm();
  }
  for (int k = 0; k < 64; ++k) {
    CHECK(field.evaluate(k / 64.0).norm() <= bound + 1e-12);
  }
}

TEST_CASE("norms: coefficient vs function L2") {
  // f = sin(2 pi t) on z: coefficient norm 1, L2 norm sqrt(1/2).
  const FourierField wave = sin_z(1.0, 1, 1.0);
  CHECK(wave.coefficient_norm() == doctest::Approx(1.0));
  CHECK(wave.function_l2_norm() == doctest::Approx(std::sqrt(0.5)));

  FourierTerm constant;
  constant.harmonic = 0;
  constant.cosine = Eigen::Vector3d(3.0, 0.0, 0.0);
  const FourierField const_field(1.0, {constant});
  CHECK(const_field.function_l2_norm() == doctest::Approx(3.0));
}

TEST_CASE("json serialization round-trips") {
  const FourierField field =
      FourierField::random(77, std::vector<int>{0, 2, 4}, 1.1, 0.5);
  const FourierField back = field_from_json(field_to_json(field));
  CHECK(back.period() == field.period());
  REQUIRE(back.terms().size() == field.terms().size());
  for (std::size_t i = 0; i < field.terms().size(); ++i) {
    CHECK(back.terms()[i].harmonic == field.terms()[i].harmonic);
    CHECK(back.terms()[i].sine == field.terms()[i].sine);
    CHECK(back.terms()[i].cosine == field.terms()[i].cosine);
  }

  CHECK_THROWS(field_from_json(nlohmann::json::parse(
      R"({"period": 1.0, "terms": [], "extra": 1})")));
  CHECK_THROWS(field_from_json(nlohmann::json::parse(
      R"({"period": 1.0, "terms": [{"omega": 1.5}]})")));
}

TEST_CASE("field_from_samples recovers band-limited fields") {
  const FourierField field =
      FourierField::random(123, std::vector<int>{0, 1, 3}, 0.9, 1.0);
  const int n = 32;
  std::vector<double> times(n);
  std::vector<Eigen::Vector3d> values(n);
  for (int i = 0; i < n; ++i) {
    times[i] = i / static_cast<double>(n);
    values[i] = field.evaluate(times[i]);
  }
  const FourierField back = field_from_samples(times, values, 1.0, 5);
  for (double t : {0.1, 0.37, 0.93}) {
    CHECK((back.evaluate(t) - field.evaluate(t)).norm() < 1e-10);
  }

  std::vector<double> bad_times = times;
  bad_times[3] += 0.01;
  CHECK_THROWS_AS(field_from_samples(bad_times, values, 1.0, 5),
                  std::invalid_argument);
}

TEST_CASE("with_harmonic_norm rescales a single harmonic") {
  const FourierField field =
      FourierField::random(9, std::vector<int>{2, 5}, 1.0, 1.0);
  const FourierField scaled = field.with_harmonic_norm(5, 0.25);
  CHECK(scaled.harmonic_norm(5) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(scaled.harmonic_norm(2) == doctest::Approx(field.harmonic_norm(2)));
  CHECK_THROWS_AS(field.with_harmonic_norm(3, 0.1), std::invalid_argument);
}
