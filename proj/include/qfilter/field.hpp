#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qfilter {

// One harmonic of a vector-valued periodic field. The angular frequency is
// stored as an integer multiple of the base 2*pi/period so that periodicity
// is exact; the harmonic-0 term is a constant offset and carries only a
// cosine part.
struct FourierTerm {
  int harmonic = 0;
  Eigen::Vector3d sine = Eigen::Vector3d::Zero();
  Eigen::Vector3d cosine = Eigen::Vector3d::Zero();
};

enum class TrigKind { sine, cosine };

// Vector-valued periodic field in the real Fourier basis,
//   f(t) = sum_w [ sine_w * sin(w t) + cosine_w * cos(w t) ],
// with every w a non-negative integer multiple of 2*pi/period.
class FourierField {
 public:
  FourierField() = default;
  explicit FourierField(double period);
  FourierField(double period, std::vector<FourierTerm> terms);

  double period() const { return period_; }
  const std::vector<FourierTerm>& terms() const { return terms_; }

  Eigen::Vector3d evaluate(double t) const;

  // Stored coefficient for a harmonic; zero if the harmonic is absent.
  Eigen::Vector3d sine_coefficient(int harmonic) const;
  Eigen::Vector3d cosine_coefficient(int harmonic) const;

  int max_harmonic() const;
  bool is_zero() const;

  // Euclidean norm of the stacked coefficient vector (the "epsilon" used when
  // drawing random fields).
  double coefficient_norm() const;
  // L2(0, T) function norm, sqrt(int_0^T |f(t)|^2 dt), from the coefficients.
  double function_l2_norm() const;

  FourierField scaled(double factor) const;
  // Copy with the sine/cosine coefficients of one harmonic rescaled so their
  // stacked norm equals `target_norm`.
  FourierField with_harmonic_norm(int harmonic, double target_norm) const;
  double harmonic_norm(int harmonic) const;

  // i.i.d. standard-normal coefficients on the given support, rescaled so the
  // stacked coefficient norm equals epsilon. Deterministic per seed and
  // independent of the support enumeration order.
  static FourierField random(std::uint64_t seed, std::span<const int> support,
                             double epsilon, double period);

 private:
  double period_ = 1.0;
  std::vector<FourierTerm> terms_;  // sorted by harmonic, unique
};

// Maps an angular frequency to its harmonic index k = omega * period / (2 pi);
// throws if omega is not commensurate with the period.
int harmonic_index(double omega, double period);
double harmonic_omega(int harmonic, double period);

// (2/T) int_0^T f(t) trig(w t) dt by composite midpoint quadrature
// ((1/T) normalization at w = 0, so constants are recovered exactly).
// steps == 0 picks the default resolution for the requested harmonic.
double fourier_coefficient(const std::function<double(double)>& f, double omega,
                           TrigKind kind, double period, int steps = 0);

// Exact coefficient lookup for one Cartesian component of a stored field.
double fourier_coefficient(const FourierField& field, int component,
                           double omega, TrigKind kind);

// int_0^T |f(t)|_2 dt by composite midpoint quadrature at the shared
// resolution (steps == 0 -> default for the field's fastest harmonic).
double integrated_strength(const FourierField& field, int steps = 0);

// Reconstructs a field from uniformly spaced samples of one period, keeping
// harmonics 0..max_harmonic. Sample spacing must be period / n_samples.
FourierField field_from_samples(std::span<const double> times,
                                std::span<const Eigen::Vector3d> values,
                                double period, int max_harmonic);

}  // namespace qfilter
