#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsr/image.hpp"
#include "dsr/simulation.hpp"
#include "dsr/solvers.hpp"

namespace dsr {

enum class SolverKind { kPg, kSm, kSandr, kL1Btv, kL1BtvL, kL2Btv };

std::string to_string(SolverKind kind);
SolverKind solver_from_string(const std::string& name);

// Parameters shared by every experiment. Sizes are LR pixels per side.
struct ExperimentConfig {
  std::size_t lr_size = 165;
  int factor = 2;
  int frames = 4;  // M; shifts come from default_shifts(factor, frames)
  int zones = 55;
  int focal = 28;
  int psf_size = 11;
  int pupil_grid = 64;
  double blur_min = 0.001;
  double blur_max = 0.06;

  int iterations = 50;
  double step = 1.0;
  double t0 = 1.0;
  std::optional<double> tolerance;
  int deblur_iterations = 50;  // per-frame stage of SM
  BtvConfig btv;
  double baseline_step = 0.01;  // sign residuals have unit magnitude per pixel

  // Photon budget of the reference experiments: the common toolbox routine
  // scales floating-point images by 1e12 before drawing Poisson counts.
  NoiseSpec noise{NoiseKind::kPoisson, 1e12, 45.0, 0};
  int trials = 20;
  std::uint64_t seed = 1;
  int workers = 1;
  Execution execution = Execution::kSequential;

  // Cropping study.
  int crop_margin = 30;  // LR pixels simulated beyond each border
  int window_order = 8;
  double window_cutoff = 1.0;
  bool window = true;
  double central_fraction = 0.9;

  // SR truth; a resolution target is generated from the seed when empty.
  std::optional<ImageGrid> truth;
  std::vector<SolverKind> solvers{SolverKind::kPg, SolverKind::kSm, SolverKind::kSandr};

  std::size_t sr_size() const { return lr_size * static_cast<std::size_t>(factor); }
  SolverConfig solver_config() const;
  void validate() const;
};

// Named parameter sets: "table1" (base values, desk-size frames),
// "table2" (165 x 165, N = 55), "table3" (255 x 255, N = 85, d_max = 0.09),
// "convergence" (330 x 330, N = 110) and "frames" (tau = 4).
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Shift grid {0, 1/tau, ..., (tau-1)/tau}^2 in a fixed order that spreads
// the first 2, 4, 8 entries as evenly as possible. The first `count`
// entries are returned.
std::vector<ShiftVector> default_shifts(int factor, int count);

// The SR truth used by every trial of a run.
ImageGrid experiment_truth(const ExperimentConfig& config);

// One simulated problem: frames (with noise) for a given trial seed.
struct Problem {
  ImageGrid truth;
  SceneSpec scene;
  std::vector<Frame> frames;
};

// Frames are drawn from `trial_seed`; their noise uses
// noise_seed_for(trial_seed), frame m then derive_seed(that, m).
Problem make_problem(const ExperimentConfig& config, const ImageGrid& truth,
                     std::uint64_t trial_seed);
std::uint64_t noise_seed_for(std::uint64_t trial_seed);

SolveResult run_solver(SolverKind kind, std::span<const Frame> frames,
                       const ExperimentConfig& config, const ImageGrid* truth);

struct NamedTrace {
  SolverKind solver;
  IterationTrace trace;
};

// One seeded problem reconstructed by every configured solver for
// config.iterations iterations.
std::vector<NamedTrace> run_convergence_trace(const ExperimentConfig& config);

struct SweepRecord {
  double value = 0.0;
  std::uint64_t seed = 0;
  SolverKind solver = SolverKind::kSandr;
  double rms = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

struct SweepResult {
  std::string variable;
  std::vector<SweepRecord> records;  // ordered by value, trial, solver
};

// Trial t of any sweep uses seed derive_seed(config.seed, t) for every
// sweep value, so values are compared on the same draws.
std::uint64_t trial_seed(const ExperimentConfig& config, int trial);

SweepResult run_solvability_sweep(const std::vector<double>& blur_max_values,
                                  const ExperimentConfig& config);
SweepResult run_noise_sweep(const std::vector<double>& snr_db_values, double blur_max,
                            const ExperimentConfig& config);
SweepResult run_frame_count_study(const std::vector<int>& counts,
                                  const ExperimentConfig& config);
// Defocus-free data (d = 0) reconstructed by the configured solvers.
SweepResult run_baseline_comparison(const ExperimentConfig& config);

struct CroppedReconstruction {
  SolverKind solver;
  ImageGrid image;
  double full_rms = 0.0;
  double central_rms = 0.0;
};

struct CroppingResult {
  ImageGrid reference;  // cropped truth, windowed like the frames
  std::vector<CroppedReconstruction> reconstructions;
};

// Frames are simulated on a grid `crop_margin` LR pixels larger on every
// side, cropped to lr_size, optionally windowed, and reconstructed as if
// the scene were periodic.
CroppingResult run_cropping_study(const ExperimentConfig& config);

// Relative RMS over the centered disk of radius fraction * min(rows, cols) / 2.
double central_relative_rms(const ImageGrid& estimate, const ImageGrid& reference,
                            double fraction);

struct SummaryRow {
  double value = 0.0;
  SolverKind solver = SolverKind::kSandr;
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

// Per (value, solver) statistics of the RMS column, in order of first
// appearance. Quartiles interpolate linearly between order statistics.
std::vector<SummaryRow> summarize(const SweepResult& sweep);

// Linear-interpolation quantile of a sample, q in [0, 1].
double quantile(std::vector<double> sample, double q);

}  // namespace dsr
