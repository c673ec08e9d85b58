#include "dsr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

#include "dsr/errors.hpp"

namespace dsr {

namespace {

constexpr std::uint64_t kTruthStream = 0x7472757468ULL;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Runs `trial(value_index, trial_index)` over the grid, in parallel over
// `workers` threads, and returns the records in (value, trial) order.
template <typename TrialFn>
std::vector<SweepRecord> run_grid(std::size_t values, int trials, int workers,
                                  TrialFn trial) {
  const auto total = static_cast<std::int64_t>(values) * trials;
  std::vector<std::vector<SweepRecord>> slots(static_cast<std::size_t>(total));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, workers))
  for (std::int64_t job = 0; job < total; ++job) {
    try {
      slots[job] = trial(static_cast<std::size_t>(job / trials),
                         static_cast<int>(job % trials));
    } catch (...) {
#pragma omp critical(dsr_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<SweepRecord> out;
  for (auto& slot : slots)
    for (auto& r : slot) out.push_back(r);
  return out;
}

std::vector<SweepRecord> solve_all(const ExperimentConfig& config, const Problem& problem,
                                   double value, std::uint64_t seed) {
  std::vector<SweepRecord> records;
  for (SolverKind kind : config.solvers) {
    const auto start = std::chrono::steady_clock::now();
    SolveResult result = run_solver(kind, problem.frames, config, &problem.truth);
    records.push_back({value, seed, kind, relative_rms(result.image, problem.truth),
                       result.trace.iterations(), seconds_since(start)});
  }
  return records;
}

void check_trials(const ExperimentConfig& config) {
  if (config.trials < 1) throw ConfigError("trials", "must be >= 1");
}

}  // namespace

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kPg: return "pg";
    case SolverKind::kSm: return "sm";
    case SolverKind::kSandr: return "sandr";
    case SolverKind::kL1Btv: return "l1btv";
    case SolverKind::kL1BtvL: return "l1btvl";
    case SolverKind::kL2Btv: return "l2btv";
  }
  return "sandr";
}

SolverKind solver_from_string(const std::string& name) {
  for (SolverKind k : {SolverKind::kPg, SolverKind::kSm, SolverKind::kSandr,
                       SolverKind::kL1Btv, SolverKind::kL1BtvL, SolverKind::kL2Btv}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("solver", "unknown solver '" + name +
                                  "' (expected sandr|pg|sm|l1btv|l1btvl|l2btv)");
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig c;
  c.step = step;
  c.t0 = t0;
  c.iterations = iterations;
  c.tolerance = tolerance;
  c.execution = execution;
  return c;
}

void ExperimentConfig::validate() const {
  if (lr_size < 1) throw ConfigError("lr_size", "must be >= 1");
  if (factor < 1) throw ConfigError("factor", "must be >= 1");
  if (frames < 1 || frames > factor * factor) {
    throw ConfigError("frames", "must lie in [1, factor^2]");
  }
  if (zones < 1 || lr_size % static_cast<std::size_t>(zones) != 0) {
    throw ConfigError("zones", "must divide lr_size");
  }
  if (focal < 1 || focal > zones) throw ConfigError("focal", "must lie in [1, zones]");
  if (psf_size < 1 || psf_size % 2 == 0) throw ConfigError("psf_size", "must be odd");
  if (pupil_grid < psf_size) throw ConfigError("pupil_grid", "must be >= psf_size");
  if (!(blur_min >= 0.0)) throw ConfigError("blur_min", "must be >= 0");
  if (!(blur_max >= blur_min)) throw ConfigError("blur_max", "must be >= blur_min");
  if (deblur_iterations < 0) throw ConfigError("deblur_iterations", "must be >= 0");
  if (!(baseline_step > 0.0)) throw ConfigError("baseline_step", "must be > 0");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  if (window_order < 1) throw ConfigError("window_order", "must be >= 1");
  if (!(window_cutoff > 0.0 && window_cutoff <= 1.0)) {
    throw ConfigError("window_cutoff", "must lie in (0, 1]");
  }
  if (!(central_fraction > 0.0 && central_fraction <= 1.0)) {
    throw ConfigError("central_fraction", "must lie in (0, 1]");
  }
  if (truth && (truth->rows() != sr_size() || truth->cols() != sr_size())) {
    throw ConfigError("truth", "must be " + std::to_string(sr_size()) + " x " +
                                   std::to_string(sr_size()));
  }
  if (solvers.empty()) throw ConfigError("solvers", "at least one solver is required");
  solver_config().validate();
  btv.validate();
  noise.validate();
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "table1" || name == "table2") return c;
  if (name == "table3") {
    c.lr_size = 255;
    c.zones = 85;
    c.focal = 43;
    c.blur_max = 0.09;
    return c;
  }
  if (name == "convergence") {
    c.lr_size = 330;
    c.zones = 110;
    c.focal = 55;
    c.iterations = 150;
    return c;
  }
  if (name == "frames") {
    c.lr_size = 84;
    c.factor = 4;
    c.frames = 16;
    c.zones = 28;
    c.focal = 14;
    c.trials = 10;
    return c;
  }
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"table1", "table2", "table3", "convergence", "frames"};
}

std::vector<ShiftVector> default_shifts(int factor, int count) {
  if (factor < 1) throw ConfigError("factor", "must be >= 1");
  if (count < 0 || count > factor * factor) {
    throw ConfigError("frames", "count must lie in [0, factor^2]");
  }
  std::vector<std::pair<int, int>> grid;
  if (factor == 2) {
    grid = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  } else if (factor == 4) {
    grid = {{0, 0}, {2, 2}, {0, 2}, {2, 0}, {1, 1}, {3, 3}, {1, 3}, {3, 1},
            {0, 1}, {0, 3}, {2, 1}, {2, 3}, {1, 0}, {3, 0}, {1, 2}, {3, 2}};
  } else {
    for (int a = 0; a < factor; ++a)
      for (int b = 0; b < factor; ++b) grid.emplace_back(a, b);
  }
  std::vector<ShiftVector> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({Fraction(grid[i].first, factor), Fraction(grid[i].second, factor)});
  }
  return out;
}

ImageGrid experiment_truth(const ExperimentConfig& config) {
  if (config.truth) return *config.truth;
  return resolution_target(config.sr_size(), config.sr_size(),
                           derive_seed(config.seed, kTruthStream));
}

std::uint64_t trial_seed(const ExperimentConfig& config, int trial) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(trial));
}

std::uint64_t noise_seed_for(std::uint64_t trial_seed) {
  return derive_seed(trial_seed, kNoiseStream);
}

Problem make_problem(const ExperimentConfig& config, const ImageGrid& truth,
                     std::uint64_t seed) {
  DefocusDraw draw;
  draw.blur_min = config.blur_min;
  draw.blur_max = config.blur_max;
  draw.zones = config.zones;
  draw.focal = config.focal;
  draw.psf_size = config.psf_size;
  draw.pupil_grid = config.pupil_grid;
  Problem p;
  p.truth = truth;
  p.scene = make_scene(truth, config.factor, default_shifts(config.factor, config.frames),
                       draw, seed);
  p.frames = generate_frames(p.scene);
  NoiseSpec noise = config.noise;
  noise.seed = noise_seed_for(seed);
  apply_noise(p.frames, noise);
  return p;
}

SolveResult run_solver(SolverKind kind, std::span<const Frame> frames,
                       const ExperimentConfig& config, const ImageGrid* truth) {
  const SolverConfig base = config.solver_config();
  switch (kind) {
    case SolverKind::kPg: return pg(frames, base, truth);
    case SolverKind::kSandr: return sandr(frames, base, truth);
    case SolverKind::kSm: {
      SolverConfig deblur = base;
      deblur.iterations = config.deblur_iterations;
      deblur.tolerance.reset();
      return sm(frames, deblur, base, truth);
    }
    case SolverKind::kL1Btv:
    case SolverKind::kL1BtvL:
    case SolverKind::kL2Btv: {
      SolverConfig c = base;
      c.step = config.baseline_step;
      const BaselineMethod method = kind == SolverKind::kL1Btv    ? BaselineMethod::kL1Btv
                                    : kind == SolverKind::kL1BtvL ? BaselineMethod::kL1BtvL
                                                                  : BaselineMethod::kL2Btv;
      return baseline_solve(frames, method, c, config.btv, truth);
    }
  }
  throw ConfigError("solver", "unhandled solver");
}

std::vector<NamedTrace> run_convergence_trace(const ExperimentConfig& config) {
  config.validate();
  const ImageGrid truth = experiment_truth(config);
  const Problem problem = make_problem(config, truth, trial_seed(config, 0));
  std::vector<NamedTrace> out;
  for (SolverKind kind : config.solvers) {
    out.push_back({kind, run_solver(kind, problem.frames, config, &problem.truth).trace});
  }
  return out;
}

SweepResult run_solvability_sweep(const std::vector<double>& blur_max_values,
                                  const ExperimentConfig& config) {
  config.validate();
  check_trials(config);
  for (double v : blur_max_values) {
    if (!(v >= config.blur_min)) throw ConfigError("blur_max", "must be >= blur_min");
  }
  const ImageGrid truth = experiment_truth(config);
  SweepResult result{"blur_max", {}};
  result.records = run_grid(blur_max_values.size(), config.trials, config.workers,
                            [&](std::size_t v, int t) {
                              ExperimentConfig c = config;
                              c.blur_max = blur_max_values[v];
                              const std::uint64_t seed = trial_seed(config, t);
                              return solve_all(c, make_problem(c, truth, seed),
                                               blur_max_values[v], seed);
                            });
  return result;
}

SweepResult run_noise_sweep(const std::vector<double>& snr_db_values, double blur_max,
                            const ExperimentConfig& config) {
  ExperimentConfig base = config;
  base.blur_max = blur_max;
  base.validate();
  check_trials(base);
  const ImageGrid truth = experiment_truth(base);
  SweepResult result{"snr_db", {}};
  result.records = run_grid(snr_db_values.size(), base.trials, base.workers,
                            [&](std::size_t v, int t) {
                              ExperimentConfig c = base;
                              c.noise.kind = NoiseKind::kGaussianSnr;
                              c.noise.snr_db = snr_db_values[v];
                              const std::uint64_t seed = trial_seed(base, t);
                              return solve_all(c, make_problem(c, truth, seed),
                                               snr_db_values[v], seed);
                            });
  return result;
}

SweepResult run_frame_count_study(const std::vector<int>& counts,
                                  const ExperimentConfig& config) {
  config.validate();
  check_trials(config);
  for (int count : counts) {
    if (count < 1 || count > config.factor * config.factor) {
      throw ConfigError("frames", "count " + std::to_string(count) +
                                      " must lie in [1, factor^2]");
    }
  }
  const ImageGrid truth = experiment_truth(config);
  SweepResult result{"frames", {}};
  result.records = run_grid(counts.size(), config.trials, config.workers,
                            [&](std::size_t v, int t) {
                              ExperimentConfig c = config;
                              c.frames = counts[v];
                              const std::uint64_t seed = trial_seed(config, t);
                              return solve_all(c, make_problem(c, truth, seed),
                                               static_cast<double>(counts[v]), seed);
                            });
  return result;
}

SweepResult run_baseline_comparison(const ExperimentConfig& config) {
  ExperimentConfig base = config;
  base.blur_min = 0.0;
  base.blur_max = 0.0;
  base.validate();
  check_trials(base);
  const ImageGrid truth = experiment_truth(base);
  SweepResult result{"blur_max", {}};
  result.records = run_grid(1, base.trials, base.workers, [&](std::size_t, int t) {
    const std::uint64_t seed = trial_seed(base, t);
    return solve_all(base, make_problem(base, truth, seed), 0.0, seed);
  });
  return result;
}

double central_relative_rms(const ImageGrid& estimate, const ImageGrid& reference,
                            double fraction) {
  if (!estimate.same_shape(reference)) {
    throw DimensionError("central_relative_rms: dimension mismatch");
  }
  const double cr = 0.5 * (static_cast<double>(reference.rows()) - 1.0);
  const double cc = 0.5 * (static_cast<double>(reference.cols()) - 1.0);
  const double radius =
      fraction * 0.5 * static_cast<double>(std::min(reference.rows(), reference.cols()));
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t r = 0; r < reference.rows(); ++r)
    for (std::size_t c = 0; c < reference.cols(); ++c) {
      if (std::hypot(r - cr, c - cc) > radius) continue;
      const double e = estimate(r, c) - reference(r, c);
      diff += e * e;
      ref += reference(r, c) * reference(r, c);
    }
  if (ref == 0.0) throw std::invalid_argument("central_relative_rms: zero reference");
  return std::sqrt(diff / ref);
}

CroppingResult run_cropping_study(const ExperimentConfig& config) {
  ExperimentConfig checked = config;
  checked.truth.reset();  // sized for the enlarged grid
  checked.validate();
  const int width = static_cast<int>(config.lr_size) / config.zones;
  if (config.crop_margin < 0 || config.crop_margin % width != 0) {
    throw ConfigError("crop_margin", "must be a nonnegative multiple of the zone width");
  }
  const int margin_zones = config.crop_margin / width;

  ExperimentConfig big = config;
  big.lr_size = config.lr_size + 2 * static_cast<std::size_t>(config.crop_margin);
  big.zones = config.zones + 2 * margin_zones;
  big.focal = config.focal + margin_zones;
  big.truth.reset();
  const ImageGrid big_truth =
      config.truth ? *config.truth
                   : resolution_target(big.sr_size(), big.sr_size(),
                                       derive_seed(config.seed, kTruthStream), 0.0);
  if (big_truth.rows() != big.sr_size() || big_truth.cols() != big.sr_size()) {
    throw ConfigError("truth", "cropping study needs a " + std::to_string(big.sr_size()) +
                                   " square truth");
  }
  const Problem wide = make_problem(big, big_truth, trial_seed(config, 0));

  const std::size_t lr = config.lr_size;
  const std::size_t sr = config.sr_size();
  const auto lr_off = static_cast<std::size_t>(config.crop_margin);
  const std::size_t sr_off = lr_off * static_cast<std::size_t>(config.factor);

  std::vector<Frame> frames;
  for (std::size_t m = 0; m < wide.frames.size(); ++m) {
    DefocusSpec spec = wide.scene.defocus[m];
    spec.zones = config.zones;
    spec.focal = config.focal;
    auto blur = std::make_shared<const BlurOperator>(BlurOperator::from_spec(lr, lr, spec));
    ImageGrid data = crop(wide.frames[m].data, lr_off, lr_off, lr, lr);
    if (config.window) data = butterworth_window(data, config.window_order, config.window_cutoff);
    frames.push_back({FrameModel(blur, wide.scene.shifts[m], config.factor), std::move(data)});
  }

  CroppingResult out;
  out.reference = crop(big_truth, sr_off, sr_off, sr, sr);
  if (config.window) {
    out.reference = butterworth_window(out.reference, config.window_order, config.window_cutoff);
  }
  for (SolverKind kind : config.solvers) {
    SolveResult r = run_solver(kind, frames, config, &out.reference);
    CroppedReconstruction rec{kind, std::move(r.image), 0.0, 0.0};
    rec.full_rms = relative_rms(rec.image, out.reference);
    rec.central_rms = central_relative_rms(rec.image, out.reference, config.central_fraction);
    out.reconstructions.push_back(std::move(rec));
  }
  return out;
}

double quantile(std::vector<double> sample, double q) {
  if (sample.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(sample.begin(), sample.end());
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  return sample[lo] + (pos - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

std::vector<SummaryRow> summarize(const SweepResult& sweep) {
  if (sweep.records.empty()) throw std::invalid_argument("summarize: empty sweep");
  std::vector<std::pair<double, SolverKind>> keys;
  std::map<std::pair<double, int>, std::vector<double>> groups;
  for (const SweepRecord& r : sweep.records) {
    const auto key = std::make_pair(r.value, static_cast<int>(r.solver));
    if (!groups.contains(key)) keys.emplace_back(r.value, r.solver);
    groups[key].push_back(r.rms);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [value, solver] : keys) {
    const auto& sample = groups[{value, static_cast<int>(solver)}];
    SummaryRow row;
    row.value = value;
    row.solver = solver;
    row.count = sample.size();
    row.min = *std::min_element(sample.begin(), sample.end());
    row.max = *std::max_element(sample.begin(), sample.end());
    row.q1 = quantile(sample, 0.25);
    row.median = quantile(sample, 0.5);
    row.q3 = quantile(sample, 0.75);
    double sum = 0.0;
    for (double v : sample) sum += v;
    row.mean = sum / static_cast<double>(sample.size());
    double ss = 0.0;
    for (double v : sample) ss += (v - row.mean) * (v - row.mean);
    row.stddev = std::sqrt(ss / static_cast<double>(sample.size()));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dsr
