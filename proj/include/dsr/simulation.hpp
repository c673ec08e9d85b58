#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dsr/image.hpp"
#include "dsr/optics.hpp"
#include "dsr/solvers.hpp"

namespace dsr {

// Independent stream seed for item `index` of a run seeded with `master`
// (splitmix64 finalizer over the pair).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

using Rng = std::mt19937_64;

// Everything needed to synthesize the LR frames of one experiment.
struct SceneSpec {
  ImageGrid truth;                    // SR object, values in [0, 1]
  int factor = 2;
  std::vector<ShiftVector> shifts;    // one per frame
  std::vector<DefocusSpec> defocus;   // one per frame
  std::uint64_t seed = 0;

  std::size_t lr_rows() const { return truth.rows() / factor; }
  std::size_t lr_cols() const { return truth.cols() / factor; }
  void validate() const;
};

// Parameters of the random per-frame defocus draw.
struct DefocusDraw {
  double blur_min = 0.001;
  double blur_max = 0.06;
  int zones = 55;
  int focal = 28;
  int psf_size = 11;
  int pupil_grid = 64;
};

// Draws one blur coefficient per frame, uniformly in [blur_min, blur_max]
// from the frame's own stream. Even frames get vertical zones, odd frames
// horizontal ones.
SceneSpec make_scene(ImageGrid truth, int factor, std::vector<ShiftVector> shifts,
                     const DefocusDraw& draw, std::uint64_t seed);

// Noiseless frames: frame_forward of the truth through each frame's chain.
std::vector<Frame> generate_frames(const SceneSpec& scene);

enum class NoiseKind { kNone, kPoisson, kGaussianSnr };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  double photon_budget = 1e4;
  double snr_db = 45.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Poisson(photon_budget * v) / photon_budget per pixel, seeded by spec.seed.
ImageGrid add_poisson_noise(const ImageGrid& frame, const NoiseSpec& spec);

// Adds N(0, sigma^2) with sigma^2 = mean(frame^2) / 10^(snr_db / 10).
ImageGrid add_gaussian_noise_snr(const ImageGrid& frame, const NoiseSpec& spec);

// Dispatches on spec.kind.
ImageGrid add_noise(const ImageGrid& frame, const NoiseSpec& spec);

// Noise for every frame; frame m uses derive_seed(spec.seed, m).
void apply_noise(std::vector<Frame>& frames, const NoiseSpec& spec);

// Knuth multiplication below mean 30, rounded normal approximation above.
std::uint64_t sample_poisson(double mean, Rng& rng);

// 10 log10(signal power / noise power) between a clean and a noisy frame.
double measured_snr_db(const ImageGrid& clean, const ImageGrid& noisy);

// 1 / (1 + (r / cutoff)^(2 order))
double butterworth_gain(double radius, double cutoff, int order);

// Radial Butterworth taper about the frame center with cutoff radius
// cutoff_fraction * min(rows, cols) / 2.
ImageGrid butterworth_window(const ImageGrid& frame, int order, double cutoff_fraction);

// Synthetic resolution target: bar groups, disks and rings with soft edges
// on a low-contrast textured background. Shapes stay `margin_fraction` away
// from the border.
ImageGrid resolution_target(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double margin_fraction = 0.08);

// Random field whose DFT vanishes outside |k_row|, |k_col| <= max_frequency,
// rescaled to [0.1, 0.9].
ImageGrid smooth_random_scene(std::size_t rows, std::size_t cols, std::uint64_t seed,
                              int max_frequency);

}  // namespace dsr
