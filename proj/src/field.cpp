#include "qfilter/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qfilter/integrate.hpp"
#include "qfilter/rng.hpp"

namespace qfilter {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_term(const FourierTerm& term) {
  if (term.harmonic < 0) {
    throw std::invalid_argument("field term harmonic must be non-negative");
  }
  if (!term.sine.allFinite() || !term.cosine.allFinite()) {
    throw std::invalid_argument("field coefficients must be finite");
  }
  if (term.harmonic == 0 && term.sine.norm() != 0.0) {
    throw std::invalid_argument(
        "sine coefficient at harmonic 0 is identically zero; store a cosine "
        "(constant) term instead");
  }
}

}  // namespace

FourierField::FourierField(double period) : period_(period) {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw std::invalid_argument("field period must be positive and finite");
  }
}

FourierField::FourierField(double period, std::vector<FourierTerm> terms)
    : FourierField(period) {
  std::sort(terms.begin(), terms.end(),
            [](const FourierTerm& a, const FourierTerm& b) {
              return a.harmonic < b.harmonic;
            });
  for (std::size_t i = 0; i < terms.size(); ++i) {
    validate_term(terms[i]);
    if (i > 0 && terms[i].harmonic == terms[i - 1].harmonic) {
      throw std::invalid_argument("duplicate harmonic in field terms");
    }
  }
  terms_ = std::move(terms);
}

Eigen::Vector3d FourierField::evaluate(double t) const {
  if (!std::isfinite(t)) {
    throw std::invalid_argument("field evaluation time must be finite");
  }
  Eigen::Vector3d value = Eigen::Vector3d::Zero();
  for (const FourierTerm& term : terms_) {
    const double wt = kTwoPi * term.harmonic / period_ * t;
    value += term.sine * std::sin(wt) + term.cosine * std::cos(wt);
  }
  return value;
}

Eigen::Vector3d FourierField::sine_coefficient(int harmonic) const {
  for (const FourierTerm& term : terms_) {
    if (term.harmonic == harmonic) return term.sine;
  }
  return Eigen::Vector3d::Zero();
}

Eigen::Vector3d FourierField::cosine_coefficient(int harmonic) const {
  for (const FourierTerm& term : terms_) {
    if (term.harmonic == harmonic) return term.cosine;
  }
  return Eigen::Vector3d::Zero();
}

int FourierField::max_harmonic() const {
  return terms_.empty() ? 0 : terms_.back().harmonic;
}

bool FourierField::is_zero() const { return coefficient_norm() == 0.0; }

double FourierField::coefficient_norm() const {
  double sq = 0.0;
  for (const FourierTerm& term : terms_) {
    sq += term.sine.squaredNorm() + term.cosine.squaredNorm();
  }
  return std::sqrt(sq);
}

double FourierField::function_l2_norm() const {
  // int_0^T |f|^2 = T [ |c_0|^2 + (1/2) sum_{w>0} (|s_w|^2 + |c_w|^2) ].
  double sq = 0.0;
  for (const FourierTerm& term : terms_) {
    const double weight = term.harmonic == 0 ? 1.0 : 0.5;
    sq += weight * (term.sine.squaredNorm() + term.cosine.squaredNorm());
  }
  return std::sqrt(period_ * sq);
}

FourierField FourierField::scaled(double factor) const {
  std::vector<FourierTerm> terms = terms_;
  for (FourierTerm& term : terms) {
    term.sine *= factor;
    term.cosine *= factor;
  }
  return FourierField(period_, std::move(terms));
}

double FourierField::harmonic_norm(int harmonic) const {
  const Eigen::Vector3d s = sine_coefficient(harmonic);
  const Eigen::Vector3d c = cosine_coefficient(harmonic);
  return std::sqrt(s.squaredNorm() + c.squaredNorm());
}

FourierField FourierField::with_harmonic_norm(int harmonic,
                                              double target_norm) const {
  const double current = harmonic_norm(harmonic);
  if (current == 0.0) {
    if (target_norm == 0.0) return *this;
    throw std::invalid_argument(
        "cannot rescale a harmonic with zero coefficients to a nonzero norm");
  }
  const double factor = target_norm / current;
  std::vector<FourierTerm> terms = terms_;
  for (FourierTerm& term : terms) {
    if (term.harmonic == harmonic) {
      term.sine *= factor;
      term.cosine *= factor;
    }
  }
  return FourierField(period_, std::move(terms));
}

FourierField FourierField::random(std::uint64_t seed,
                                  std::span<const int> support, double epsilon,
                                  double period) {
  if (support.empty()) {
    throw std::invalid_argument("random field support must be non-empty");
  }
  if (!(epsilon >= 0.0)) {
    throw std::invalid_argument("random field epsilon must be non-negative");
  }
  std::vector<int> harmonics(support.begin(), support.end());
  std::sort(harmonics.begin(), harmonics.end());
  if (std::adjacent_find(harmonics.begin(), harmonics.end()) !=
      harmonics.end()) {
    throw std::invalid_argument("random field support has duplicate entries");
  }

  // Coefficients are drawn in ascending-harmonic order (sine triple, then
  // cosine triple); harmonic 0 draws only its cosine part.
  SplitMix64 rng(seed);
  std::vector<FourierTerm> terms;
  terms.reserve(harmonics.size());
  double sq = 0.0;
  for (int k : harmonics) {
    FourierTerm term;
    term.harmonic = k;
    if (k > 0) {
      for (int i = 0; i < 3; ++i) term.sine[i] = rng.next_gaussian();
    }
    for (int i = 0; i < 3; ++i) term.cosine[i] = rng.next_gaussian();
    sq += term.sine.squaredNorm() + term.cosine.squaredNorm();
    terms.push_back(term);
  }
  double factor = 0.0;
  if (epsilon > 0.0) {
    const double norm = std::sqrt(sq);
    if (norm == 0.0) {
      throw std::runtime_error("degenerate zero draw in random field");
    }
    factor = epsilon / norm;
  }
  for (FourierTerm& term : terms) {
    term.sine *= factor;
    term.cosine *= factor;
  }
  return FourierField(period, std::move(terms));
}

int harmonic_index(double omega, double period) {
  const double ratio = omega * period / kTwoPi;
  const double rounded = std::round(ratio);
  if (!(std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, std::abs(rounded)))) {
    throw std::invalid_argument(
        "angular frequency is not a harmonic of 2*pi/period");
  }
  if (rounded < 0.0) {
    throw std::invalid_argument("angular frequency must be non-negative");
  }
  return static_cast<int>(rounded);
}

double harmonic_omega(int harmonic, double period) {
  return kTwoPi * harmonic / period;
}

double fourier_coefficient(const std::function<double(double)>& f, double omega,
                           TrigKind kind, double period, int steps) {
  const int harmonic = harmonic_index(omega, period);
  if (steps <= 0) steps = default_step_count(harmonic);
  const double w = harmonic_omega(harmonic, period);
  const auto integrand = [&](double t) {
    const double trig = kind == TrigKind::sine ? std::sin(w * t)
                                               : std::cos(w * t);
    return f(t) * trig;
  };
  // Orthogonality normalization: int cos^2 = T at w = 0, T/2 otherwise.
  const double scale = harmonic == 0 ? 1.0 / period : 2.0 / period;
  return scale * midpoint_integral(integrand, period, steps);
}

double fourier_coefficient(const FourierField& field, int component,
                           double omega, TrigKind kind) {
  if (component < 0 || component > 2) {
    throw std::invalid_argument("field component index must be 0, 1 or 2");
  }
  const int harmonic = harmonic_index(omega, field.period());
  const Eigen::Vector3d coeff = kind == TrigKind::sine
                                    ? field.sine_coefficient(harmonic)
                                    : field.cosine_coefficient(harmonic);
  return coeff[component];
}

double integrated_strength(const FourierField& field, int steps) {
  if (steps <= 0) steps = default_step_count(field.max_harmonic());
  return midpoint_integral(
      [&](double t) { return field.evaluate(t).norm(); }, field.period(),
      steps);
}

FourierField field_from_samples(std::span<const double> times,
                                std::span<const Eigen::Vector3d> values,
                                double period, int max_harmonic) {
  const std::size_t n = times.size();
  if (n < 2 || values.size() != n) {
    throw std::invalid_argument("need at least two matching field samples");
  }
  const double dt = period / static_cast<double>(n);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * period) {
      throw std::invalid_argument(
          "field samples must be uniformly spaced with spacing period/n");
    }
  }
  if (max_harmonic >= static_cast<int>(n) / 2) {
    throw std::invalid_argument(
        "max harmonic must be below the sample Nyquist limit n/2");
  }

  std::vector<FourierTerm> terms;
  for (int k = 0; k <= max_harmonic; ++k) {
    FourierTerm term;
    term.harmonic = k;
    const double w = harmonic_omega(k, period);
    const double scale = (k == 0 ? 1.0 : 2.0) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (k > 0) term.sine += values[i] * (scale * std::sin(w * times[i]));
      term.cosine += values[i] * (scale * std::cos(w * times[i]));
    }
    if (term.sine.norm() > 0.0 || term.cosine.norm() > 0.0) {
      terms.push_back(term);
    }
  }
  return FourierField(period, std::move(terms));
}

}  // namespace qfilter
