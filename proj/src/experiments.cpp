#include "qfilter/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "qfilter/rng.hpp"

namespace qfilter {

void run_indexed(int count, int jobs, const std::function<void(int)>& body) {
  if (count <= 0) return;
  if (jobs <= 0) {
    jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;
  }
  jobs = std::min(jobs, count);
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::scoped_lock lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

FourierField single_sinusoid(double period, int harmonic, double amplitude,
                             int component) {
  FourierTerm term;
  term.harmonic = harmonic;
  term.sine[component] = amplitude;
  return FourierField(period, {term});
}

std::vector<int> harmonic_range(int first, int last) {
  std::vector<int> harmonics;
  for (int k = first; k <= last; ++k) harmonics.push_back(k);
  return harmonics;
}

// ---------------------------------------------------------------------------
// Frequency sweep
// ---------------------------------------------------------------------------

std::vector<SweepPoint> frequency_sweep(const SweepSpec& spec,
                                        std::vector<TrialFailure>* failures) {
  if (spec.realizations < 1) {
    throw std::invalid_argument("sweep needs at least one realization");
  }
  if (spec.control_harmonics.empty()) {
    throw std::invalid_argument("sweep needs at least one control frequency");
  }
  if (spec.signal.period() != spec.period) {
    throw std::invalid_argument("sweep signal period must match spec period");
  }

  const int count =
      static_cast<int>(spec.control_harmonics.size()) * spec.realizations;
  std::vector<SweepPoint> points(count);
  std::vector<char> valid(count, 0);
  std::vector<std::string> errors(count);
  run_indexed(count, spec.jobs, [&](int index) {
    const int freq_slot = index / spec.realizations;
    const int realization = index % spec.realizations;
    const int harmonic = spec.control_harmonics[freq_slot];
    const std::uint64_t seed = SplitMix64::derive(spec.base_seed, index);
    try {
      const FourierField background = FourierField::random(
          seed, spec.background_support, spec.background_epsilon, spec.period);
      SensorConfig config;
      config.control_harmonic = harmonic;
      config.period = spec.period;
      config.steps = spec.steps;
      const ResponseResult result =
          exact_response(spec.signal, background, config);

      SweepPoint& point = points[index];
      point.control_harmonic = harmonic;
      point.omega0 = config.omega0();
      point.realization = realization;
      point.seed = seed;
      point.response = result.response;
      double sum = 0.0;
      for (const OrientationResponse& o : result.per_orientation) {
        sum += o.even_sum();
      }
      point.response_sum =
          sum / static_cast<double>(result.per_orientation.size());
      valid[index] = 1;
    } catch (const std::exception& e) {
      if (failures == nullptr) throw;
      errors[index] = e.what();
    }
  });

  std::vector<SweepPoint> kept;
  kept.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (valid[i]) {
      kept.push_back(points[i]);
    } else if (failures != nullptr) {
      failures->push_back({i, errors[i]});
    }
  }
  return kept;
}

std::vector<std::pair<int, double>> sweep_medians(
    const std::vector<SweepPoint>& points) {
  std::vector<int> order;
  for (const SweepPoint& p : points) {
    if (std::find(order.begin(), order.end(), p.control_harmonic) == order.end()) {
      order.push_back(p.control_harmonic);
    }
  }
  std::vector<std::pair<int, double>> medians;
  for (int harmonic : order) {
    std::vector<double> values;
    for (const SweepPoint& p : points) {
      if (p.control_harmonic == harmonic) values.push_back(p.response);
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const double median = n % 2 == 1
                              ? values[n / 2]
                              : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    medians.emplace_back(harmonic, median);
  }
  return medians;
}

// ---------------------------------------------------------------------------
// Error scaling
// ---------------------------------------------------------------------------

std::vector<double> default_epsilon_grid() {
  const int count = 20;
  const double lo = std::log10(1e-2);
  const double hi = std::log10(0.5);
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) {
    grid[i] = std::pow(10.0, lo + (hi - lo) * i / (count - 1));
  }
  return grid;
}

ScalingResult error_scaling(const ScalingSpec& spec) {
  std::vector<double> grid =
      spec.epsilon_grid.empty() ? default_epsilon_grid() : spec.epsilon_grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) {
      throw std::invalid_argument("epsilon values must be positive");
    }
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw std::invalid_argument("epsilon grid must be strictly ascending");
    }
  }
  if (spec.trials_per_epsilon < 1) {
    throw std::invalid_argument("scaling needs at least one trial per epsilon");
  }

  const int per_eps = spec.trials_per_epsilon;
  const int count = static_cast<int>(grid.size()) * per_eps;
  std::vector<TrialRecord> records(count);
  std::vector<char> valid(count, 0);
  std::vector<std::string> errors(count);
  run_indexed(count, spec.jobs, [&](int index) {
    const int eps_slot = index / per_eps;
    const double epsilon = grid[eps_slot];
    const std::uint64_t seed = SplitMix64::derive(spec.base_seed, index);
    try {
      const FourierField signal =
          FourierField::random(SplitMix64::derive(seed, 1), spec.signal_support,
                               epsilon, spec.period);
      const FourierField background =
          FourierField::random(SplitMix64::derive(seed, 2),
                               spec.background_support, epsilon, spec.period);
      SensorConfig config;
      config.control_harmonic = spec.control_harmonic;
      config.period = spec.period;
      config.steps = spec.steps;
      config.axes = spec.axes;
      const ResponseResult response =
          exact_response(signal, background, config);

      TrialRecord& record = records[index];
      record.trial = index % per_eps;
      record.seed = seed;
      record.epsilon_signal = epsilon;
      record.epsilon_background = epsilon;
      record.control_harmonic = spec.control_harmonic;
      record.exact_probability = response.response;
      record.model_probability = response.model;
      record.abs_residual = std::abs(response.residual);
      record.integrated_signal = response.integrated_signal;
      record.integrated_background = response.integrated_background;
      record.amplitude_bound = response.amplitude_bound;
      record.probability_bound = response.probability_bound;
      valid[index] = 1;
    } catch (const std::exception& e) {
      errors[index] = e.what();
    }
  });

  ScalingResult result;
  result.trials.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (valid[i]) {
      result.trials.push_back(records[i]);
    } else {
      result.failures.push_back({i, errors[i]});
    }
  }

  for (std::size_t e = 0; e < grid.size(); ++e) {
    ScalingSummary summary;
    summary.epsilon = grid[e];
    double total = 0.0;
    double worst = 0.0;
    int kept = 0;
    for (int t = 0; t < per_eps; ++t) {
      const int index = static_cast<int>(e) * per_eps + t;
      if (!valid[index]) continue;
      const double r = records[index].abs_residual;
      total += r;
      worst = std::max(worst, r);
      ++kept;
    }
    summary.mean_abs_residual = kept > 0 ? total / kept : 0.0;
    summary.max_abs_residual = worst;
    result.per_epsilon.push_back(summary);
  }
  return result;
}

PolyFit fit_cubic_quartic(std::span<const std::pair<double, double>> points) {
  std::vector<double> distinct;
  for (const auto& [eps, y] : points) {
    if (std::find(distinct.begin(), distinct.end(), eps) == distinct.end()) {
      distinct.push_back(eps);
    }
  }
  if (distinct.size() < 2) {
    throw std::invalid_argument(
        "cubic/quartic fit needs at least two distinct abscissae");
  }

  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double eps = points[i].first;
    design(i, 0) = eps * eps * eps;
    design(i, 1) = design(i, 0) * eps;
    y[i] = points[i].second;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 2) {
    throw std::invalid_argument("rank-deficient design matrix");
  }
  const Eigen::Vector2d coeffs = qr.solve(y);

  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  const double ss_res = (y - design * coeffs).squaredNorm();
  PolyFit fit;
  fit.cubic = coeffs[0];
  fit.quartic = coeffs[1];
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

double fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) {
    throw std::invalid_argument("log-log fit needs at least two points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw std::invalid_argument("log-log fit needs positive data");
    }
    const double lx = std::log(x);
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points.size());
  const double denom = sxx - sx * sx / n;
  if (denom <= 0.0) {
    throw std::invalid_argument("log-log fit needs distinct abscissae");
  }
  return (sxy - sx * sy / n) / denom;
}

// ---------------------------------------------------------------------------
// Heisenberg study
// ---------------------------------------------------------------------------

HeisenbergResult heisenberg_study(const HeisenbergSpec& spec) {
  if (spec.n_list.empty()) {
    throw std::invalid_argument("heisenberg study needs at least one N");
  }
  if (spec.signal.period() != spec.period) {
    throw std::invalid_argument("signal period must match spec period");
  }
  const double theta = spec.signal.harmonic_norm(spec.control_harmonic);
  if (!(theta > 0.0)) {
    throw std::invalid_argument(
        "signal must have support at the control harmonic");
  }
  const FourierField zero_signal(spec.period);

  HeisenbergResult result;
  result.points.resize(spec.n_list.size());
  run_indexed(static_cast<int>(spec.n_list.size()), spec.jobs, [&](int slot) {
    const int n_qubits = spec.n_list[slot];
    HeisenbergPoint& point = result.points[slot];
    point.n_qubits = n_qubits;

    const auto p_of_theta = [&](double value) {
      const FourierField scaled =
          spec.signal.with_harmonic_norm(spec.control_harmonic, value);
      return collective_response(scaled, zero_signal, spec.control_harmonic,
                                 n_qubits, spec.steps);
    };
    point.detection = p_of_theta(theta);
    try {
      point.cfi = cfi(p_of_theta, theta, spec.relative_dtheta * theta);
      point.cfi_defined = true;
    } catch (const std::domain_error&) {
      point.cfi = 0.0;
      point.cfi_defined = false;
    }

    const TwoRegisterState initial = initial_entangled_state(n_qubits);
    double min_fidelity = 1.0;
    for (int trial = 0; trial < spec.background_checks; ++trial) {
      const std::uint64_t seed = SplitMix64::derive(
          spec.base_seed, static_cast<std::uint64_t>(slot) * 65536 + trial);
      const FourierField background =
          FourierField::random(seed, harmonic_range(1, 10),
                               spec.background_epsilon, spec.period);
      for (ControlAxis axis : all_control_axes()) {
        const TwoRegisterState evolved =
            collective_propagate(zero_signal, background, spec.control_harmonic,
                                 axis, n_qubits, spec.steps);
        min_fidelity = std::min(min_fidelity, evolved.fidelity(initial));
      }
    }
    point.min_zero_signal_fidelity = min_fidelity;
  });

  std::vector<std::pair<double, double>> detection_points, cfi_points;
  for (const HeisenbergPoint& point : result.points) {
    if (point.detection > 0.0) {
      detection_points.emplace_back(point.n_qubits, point.detection);
    }
    if (point.cfi_defined && point.cfi > 0.0) {
      cfi_points.emplace_back(point.n_qubits, point.cfi);
    }
  }
  if (detection_points.size() >= 2) {
    result.detection_slope = fit_loglog_slope(detection_points);
  }
  if (cfi_points.size() >= 2) {
    result.cfi_slope = fit_loglog_slope(cfi_points);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Zero-signal suite
// ---------------------------------------------------------------------------

ZeroSignalResult zero_signal_suite(const ZeroSignalSpec& spec) {
  if (spec.trials < 1) {
    throw std::invalid_argument("zero-signal suite needs at least one trial");
  }
  const FourierField zero_signal(spec.period);

  ZeroSignalResult result;
  result.trials.resize(spec.trials);
  run_indexed(spec.trials, spec.jobs, [&](int index) {
    const std::uint64_t seed = SplitMix64::derive(spec.base_seed, index);
    const FourierField background = FourierField::random(
        seed, spec.background_support, spec.background_epsilon, spec.period);
    SensorConfig config;
    config.control_harmonic = spec.control_harmonic;
    config.period = spec.period;
    config.steps = spec.steps;
    const ResponseResult response =
        exact_response(zero_signal, background, config);

    double worst = 0.0;
    for (const OrientationResponse& orientation : response.per_orientation) {
      worst = std::max({worst, orientation.even_first(),
                        orientation.even_second()});
    }
    result.trials[index] = {index, seed, worst};
  });

  for (const ZeroSignalTrial& trial : result.trials) {
    result.max_even_probability =
        std::max(result.max_even_probability, trial.max_even_probability);
  }
  return result;
}

}  // namespace qfilter
