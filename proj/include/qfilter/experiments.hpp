#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfilter/collective.hpp"
#include "qfilter/field.hpp"
#include "qfilter/protocol.hpp"

namespace qfilter {

// Runs body(0..count-1), optionally across `jobs` worker threads. Results must
// be written into per-index slots so output is identical for any job count.
void run_indexed(int count, int jobs, const std::function<void(int)>& body);

// A trial that threw instead of producing a record.
struct TrialFailure {
  int trial = 0;
  std::string message;
};

// Default trial fields: a single sinusoid of amplitude 0.1 on the z axis at
// harmonic 5 (omega = 10*pi for T = 1) over a 10-harmonic background.
FourierField single_sinusoid(double period, int harmonic, double amplitude,
                             int component = 2);
std::vector<int> harmonic_range(int first, int last);

// ---------------------------------------------------------------------------
// Frequency sweep: response vs control frequency over randomized backgrounds.
// ---------------------------------------------------------------------------

struct SweepSpec {
  double period = 1.0;
  FourierField signal = single_sinusoid(1.0, 5, 0.1);
  std::vector<int> background_support = harmonic_range(1, 10);
  double background_epsilon = 1.0;
  std::vector<int> control_harmonics = harmonic_range(1, 10);
  int realizations = 200;
  std::uint64_t base_seed = 0;
  int steps = 0;
  int jobs = 1;
};

struct SweepPoint {
  int control_harmonic = 0;
  double omega0 = 0.0;
  int realization = 0;
  std::uint64_t seed = 0;
  double response = 0.0;      // mean of the two even-parity outcomes
  double response_sum = 0.0;  // their sum
};

// Per-trial propagation failures are recorded into `failures` (and the point
// dropped) when a sink is given; without one the first failure propagates.
std::vector<SweepPoint> frequency_sweep(
    const SweepSpec& spec, std::vector<TrialFailure>* failures = nullptr);

// Median response per control harmonic, keyed in spec order.
std::vector<std::pair<int, double>> sweep_medians(
    const std::vector<SweepPoint>& points);

// ---------------------------------------------------------------------------
// Error scaling: |p - pbar| vs field strength, cubic/quartic regression.
// ---------------------------------------------------------------------------

struct ScalingSpec {
  double period = 1.0;
  std::vector<double> epsilon_grid;  // empty -> 20 log-spaced in [1e-2, 0.5]
  std::vector<int> signal_support = harmonic_range(1, 7);
  std::vector<int> background_support = harmonic_range(1, 10);
  int control_harmonic = 5;
  // The reference experiment measures the x-basis even-parity outcomes.
  std::vector<ControlAxis> axes{ControlAxis::plus_x};
  int trials_per_epsilon = 100;
  std::uint64_t base_seed = 0;
  int steps = 0;
  int jobs = 1;
};

std::vector<double> default_epsilon_grid();

struct TrialRecord {
  int trial = 0;  // index within its epsilon block
  std::uint64_t seed = 0;
  double epsilon_signal = 0.0;
  double epsilon_background = 0.0;
  int control_harmonic = 0;
  double exact_probability = 0.0;
  double model_probability = 0.0;
  double abs_residual = 0.0;
  double integrated_signal = 0.0;
  double integrated_background = 0.0;
  double amplitude_bound = 0.0;
  double probability_bound = 0.0;
};

struct ScalingSummary {
  double epsilon = 0.0;
  double mean_abs_residual = 0.0;
  double max_abs_residual = 0.0;
};

struct ScalingResult {
  std::vector<TrialRecord> trials;       // epsilon-major, trial-minor order
  std::vector<ScalingSummary> per_epsilon;
  std::vector<TrialFailure> failures;
};

ScalingResult error_scaling(const ScalingSpec& spec);

// Least squares on the basis {eps^3, eps^4} with no intercept;
// R^2 = 1 - SS_res / SS_tot.
struct PolyFit {
  double cubic = 0.0;
  double quartic = 0.0;
  double r_squared = 0.0;
};

PolyFit fit_cubic_quartic(std::span<const std::pair<double, double>> points);

// Unweighted least-squares slope of log(y) against log(x); both must be > 0.
double fit_loglog_slope(std::span<const std::pair<double, double>> points);

// ---------------------------------------------------------------------------
// Heisenberg scaling study: p(M) and CFI vs register size.
// ---------------------------------------------------------------------------

struct HeisenbergSpec {
  std::vector<int> n_list{2, 4, 8, 16, 32};
  double period = 1.0;
  FourierField signal = single_sinusoid(1.0, 5, 0.02);
  int control_harmonic = 5;
  int background_checks = 20;  // zero-signal fidelity trials per N
  double background_epsilon = 1.0;
  std::uint64_t base_seed = 0;
  int steps = 0;
  int jobs = 1;
  double relative_dtheta = 1e-3;
};

struct HeisenbergPoint {
  int n_qubits = 0;
  double detection = 0.0;  // orientation-averaged p(M)
  double cfi = 0.0;
  bool cfi_defined = false;
  double min_zero_signal_fidelity = 1.0;
};

struct HeisenbergResult {
  std::vector<HeisenbergPoint> points;
  std::optional<double> detection_slope;
  std::optional<double> cfi_slope;
};

HeisenbergResult heisenberg_study(const HeisenbergSpec& spec);

// ---------------------------------------------------------------------------
// Zero-signal suite: worst even-parity probability over random backgrounds.
// ---------------------------------------------------------------------------

struct ZeroSignalSpec {
  double period = 1.0;
  std::vector<int> background_support = harmonic_range(1, 10);
  double background_epsilon = 1.0;
  int control_harmonic = 5;
  int trials = 100;
  std::uint64_t base_seed = 0;
  int steps = 0;
  int jobs = 1;
};

struct ZeroSignalTrial {
  int trial = 0;
  std::uint64_t seed = 0;
  double max_even_probability = 0.0;
};

struct ZeroSignalResult {
  std::vector<ZeroSignalTrial> trials;
  double max_even_probability = 0.0;
};

ZeroSignalResult zero_signal_suite(const ZeroSignalSpec& spec);

}  // namespace qfilter
