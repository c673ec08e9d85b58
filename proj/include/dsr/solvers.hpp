#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsr/image.hpp"
#include "dsr/operators.hpp"

namespace dsr {

// How per-frame work inside one iteration is scheduled. Both modes combine
// per-frame results in frame order, so they produce identical bits.
enum class Execution { kSequential, kParallel };

struct SolverConfig {
  double step = 1.0;    // lambda
  double t0 = 1.0;      // initial acceleration scalar
  int iterations = 50;  // K
  // Stop when the gradient-norm sum grows by more than this between two
  // iterations. Disabled when empty.
  std::optional<double> tolerance;
  bool acceleration = true;
  Execution execution = Execution::kSequential;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  std::optional<double> rms;             // relative RMS of P(O^k), if truth given
  std::optional<double> grad_norm_sum;   // sum_m ||G_m||; absent for k = 0
  double seconds = 0.0;                  // wall time since solver start
};

// Record 0 describes the initialization, record k the state after k
// iterations.
struct IterationTrace {
  std::vector<IterationRecord> records;
  int iterations() const {
    return records.empty() ? 0 : records.back().iteration;
  }
  std::optional<double> final_rms() const {
    return records.empty() ? std::nullopt : records.back().rms;
  }
};

struct Frame {
  FrameModel model;
  ImageGrid data;
};

struct SolveResult {
  ImageGrid image;
  IterationTrace trace;
};

// (1 + sqrt(1 + 4 t^2)) / 2
double next_momentum(double t);

// (1/M) sum_m translate(upsample(i_m), -factor * v_m)
ImageGrid initial_estimate(std::span<const Frame> frames);

// Simultaneous superresolution and nonuniform defocus removal: accelerated
// projected gradient on sum_m 0.5 ||B_m D T_m O - i_m||^2 over [0,1].
SolveResult sandr(std::span<const Frame> frames, const SolverConfig& config,
                  const ImageGrid* truth = nullptr);

// sandr without the extrapolation step.
SolveResult pg(std::span<const Frame> frames, const SolverConfig& config,
               const ImageGrid* truth = nullptr);

// Single-frame nonuniform defocus removal, started from the observation.
ImageGrid fista_deconvolve(const BlurOperator& blur, const ImageGrid& observed,
                           const SolverConfig& config);

// Sequential minimization: deblur every frame on its own, then run the
// accelerated superresolution step on the deblurred frames.
SolveResult sm(std::span<const Frame> frames, const SolverConfig& deblur,
               const SolverConfig& superres, const ImageGrid* truth = nullptr);

enum class ResidualNorm { kL1, kL2 };
enum class BaselineMethod { kL1Btv, kL1BtvL, kL2Btv };

std::string to_string(BaselineMethod method);

struct BtvConfig {
  double reg_weight = 0.01;
  double decay = 0.7;    // alpha
  int window = 2;        // P
  double laplace_weight = 0.01;
  ResidualNorm residual_norm = ResidualNorm::kL1;

  void validate() const;
};

// Bilateral total variation sum over 0 < |(l,k)|_inf <= P of
// decay^(|l|+|k|) * ||O - translate(O, (l,k))||_1.
double btv_value(const ImageGrid& image, const BtvConfig& config);
// Its (sub)gradient, with sign(0) = 0.
ImageGrid btv_gradient(const ImageGrid& image, const BtvConfig& config);

// Periodic five-point Laplacian.
ImageGrid laplacian(const ImageGrid& image);

// Blur-agnostic superresolution baselines: projected gradient descent on an
// L1 or L2 data term plus BTV (and, for kL1BtvL, a Laplacian penalty). The
// method selects the residual norm and whether the Laplacian term is used.
SolveResult baseline_solve(std::span<const Frame> frames, BaselineMethod method,
                           const SolverConfig& config, const BtvConfig& btv,
                           const ImageGrid* truth = nullptr);

}  // namespace dsr
