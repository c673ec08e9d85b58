#include "dsr/solvers.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "dsr/errors.hpp"
#include "dsr/kernels.hpp"

namespace dsr {
namespace {

using Clock = std::chrono::steady_clock;

// Per-frame search direction at the current point O.
using FrameDirection = std::function<ImageGrid(std::size_t, const ImageGrid&)>;
// Optional term evaluated once per iteration and added to every direction.
using SharedTerm = std::function<ImageGrid(const ImageGrid&)>;

void require_frames(std::span<const Frame> frames) {
  if (frames.empty()) throw std::invalid_argument("solver: no frames");
  const FrameModel& first = frames.front().model;
  for (const Frame& f : frames) {
    if (f.model.factor() != first.factor() ||
        f.model.lr_rows() != first.lr_rows() ||
        f.model.lr_cols() != first.lr_cols()) {
      throw DimensionError("solver: frames disagree in factor or size");
    }
    if (f.data.rows() != f.model.lr_rows() || f.data.cols() != f.model.lr_cols()) {
      throw DimensionError("solver: frame data does not match its model");
    }
  }
}

// Algorithm loop shared by every solver in this file:
//   X_m = P(O - step * G_m),  X = mean_m X_m,
//   O   = X + ((t_k - 1) / t_{k+1}) (X - X_prev)   (acceleration on)
//   O   = X                                       (acceleration off)
// and the returned image is P(O_end).
SolveResult projected_gradient_loop(ImageGrid init, std::size_t frame_count,
                                    const FrameDirection& direction,
                                    const SolverConfig& config,
                                    const ImageGrid* truth,
                                    const SharedTerm& shared = {}) {
  config.validate();
  if (truth != nullptr && !truth->same_shape(init)) {
    throw DimensionError("solver: truth image does not match the SR grid");
  }
  const auto start = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  auto rms_of = [&](const ImageGrid& o) -> std::optional<double> {
    if (truth == nullptr) return std::nullopt;
    return relative_rms(project_unit_interval(o), *truth);
  };

  SolveResult result;
  ImageGrid object = std::move(init);
  ImageGrid previous = object;
  double t = config.t0;
  std::optional<double> previous_sum;
  result.trace.records.push_back({0, rms_of(object), std::nullopt, elapsed()});

  const double inv_frames = 1.0 / static_cast<double>(frame_count);
  std::vector<ImageGrid> steps(frame_count);
  std::vector<double> norms(frame_count);

  for (int k = 0; k < config.iterations; ++k) {
    const ImageGrid common = shared ? shared(object) : ImageGrid();
    auto frame_step = [&](std::size_t m) {
      ImageGrid g = direction(m, object);
      if (shared) g += common;
      norms[m] = g.norm();
      kernels::parallel::projected_step(object, g, config.step, steps[m]);
    };
    if (config.execution == Execution::kParallel) {
      const auto n = static_cast<std::int64_t>(frame_count);
#pragma omp parallel for schedule(dynamic, 1)
      for (std::int64_t m = 0; m < n; ++m) frame_step(static_cast<std::size_t>(m));
    } else {
      for (std::size_t m = 0; m < frame_count; ++m) frame_step(m);
    }

    double sum = 0.0;
    for (double v : norms) sum += v;
    if (!std::isfinite(sum)) {
      throw NumericError("solver: non-finite gradient at iteration " + std::to_string(k));
    }
    if (config.tolerance && previous_sum && sum > *previous_sum + *config.tolerance) {
      break;
    }

    ImageGrid x = steps[0];
    for (std::size_t m = 1; m < frame_count; ++m) x += steps[m];
    x *= inv_frames;

    if (config.acceleration) {
      const double t_next = next_momentum(t);
      const double beta = (t - 1.0) / t_next;
      object = x;
      const auto xv = x.values();
      const auto pv = previous.values();
      auto ov = object.values();
      for (std::size_t p = 0; p < ov.size(); ++p) ov[p] += beta * (xv[p] - pv[p]);
      t = t_next;
    } else {
      object = x;
    }
    if (!object.all_finite()) {
      throw NumericError("solver: non-finite iterate at iteration " + std::to_string(k + 1));
    }
    previous = std::move(x);
    previous_sum = sum;
    result.trace.records.push_back({k + 1, rms_of(object), sum, elapsed()});
  }
  result.image = project_unit_interval(object);
  return result;
}

ImageGrid sign_of(const ImageGrid& x) {
  ImageGrid out(x.rows(), x.cols());
  const auto in = x.values();
  auto o = out.values();
  for (std::size_t p = 0; p < in.size(); ++p) {
    o[p] = in[p] > 0.0 ? 1.0 : (in[p] < 0.0 ? -1.0 : 0.0);
  }
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("step", "must be > 0");
  if (!(t0 >= 1.0) || !std::isfinite(t0)) throw ConfigError("t0", "must be >= 1");
  if (iterations < 0) throw ConfigError("iterations", "must be >= 0");
  if (tolerance && !(*tolerance >= 0.0)) throw ConfigError("tolerance", "must be >= 0");
}

double next_momentum(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

ImageGrid initial_estimate(std::span<const Frame> frames) {
  require_frames(frames);
  const FrameModel& first = frames.front().model;
  ImageGrid sum(first.sr_rows(), first.sr_cols());
  for (const Frame& f : frames) {
    sum += kernels::parallel::upsample_shifted(f.data, -f.model.sr_shift(), f.model.factor());
  }
  sum *= 1.0 / static_cast<double>(frames.size());
  return sum;
}

SolveResult sandr(std::span<const Frame> frames, const SolverConfig& config,
                  const ImageGrid* truth) {
  require_frames(frames);
  return projected_gradient_loop(
      initial_estimate(frames), frames.size(),
      [&](std::size_t m, const ImageGrid& o) {
        return frame_gradient(frames[m].model, o, frames[m].data);
      },
      config, truth);
}

SolveResult pg(std::span<const Frame> frames, const SolverConfig& config,
               const ImageGrid* truth) {
  SolverConfig plain = config;
  plain.acceleration = false;
  return sandr(frames, plain, truth);
}

ImageGrid fista_deconvolve(const BlurOperator& blur, const ImageGrid& observed,
                           const SolverConfig& config) {
  if (observed.rows() != blur.rows() || observed.cols() != blur.cols()) {
    throw DimensionError("fista_deconvolve: observation does not match blur frame");
  }
  SolverConfig single = config;
  single.execution = Execution::kSequential;
  single.tolerance.reset();
  return projected_gradient_loop(
             observed, 1,
             [&](std::size_t, const ImageGrid& o) {
               ImageGrid residual = blur.apply(o);
               residual -= observed;
               return blur.adjoint(residual);
             },
             single, nullptr)
      .image;
}

SolveResult sm(std::span<const Frame> frames, const SolverConfig& deblur,
               const SolverConfig& superres, const ImageGrid* truth) {
  require_frames(frames);
  deblur.validate();
  std::vector<Frame> deblurred;
  deblurred.reserve(frames.size());
  for (const Frame& f : frames) deblurred.push_back({f.model.without_blur(), f.data});

  auto deconvolve = [&](std::size_t m) {
    deblurred[m].data = fista_deconvolve(frames[m].model.blur(), frames[m].data, deblur);
  };
  if (deblur.execution == Execution::kParallel) {
    const auto n = static_cast<std::int64_t>(frames.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t m = 0; m < n; ++m) deconvolve(static_cast<std::size_t>(m));
  } else {
    for (std::size_t m = 0; m < frames.size(); ++m) deconvolve(m);
  }
  return sandr(deblurred, superres, truth);
}

std::string to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::kL1Btv: return "l1btv";
    case BaselineMethod::kL1BtvL: return "l1btvl";
    case BaselineMethod::kL2Btv: return "l2btv";
  }
  return "unknown";
}

SolveResult baseline_solve(std::span<const Frame> frames, BaselineMethod method,
                           const SolverConfig& config, const BtvConfig& btv,
                           const ImageGrid* truth) {
  require_frames(frames);
  BtvConfig reg = btv;
  reg.residual_norm =
      method == BaselineMethod::kL2Btv ? ResidualNorm::kL2 : ResidualNorm::kL1;
  if (method != BaselineMethod::kL1BtvL) reg.laplace_weight = 0.0;
  reg.validate();

  SolverConfig plain = config;
  plain.acceleration = false;

  auto direction = [&](std::size_t m, const ImageGrid& o) {
    const FrameModel& model = frames[m].model;
    ImageGrid residual =
        kernels::parallel::shifted_downsample(o, model.sr_shift(), model.factor());
    residual -= frames[m].data;
    if (reg.residual_norm == ResidualNorm::kL1) residual = sign_of(residual);
    return kernels::parallel::upsample_shifted(residual, -model.sr_shift(),
                                               model.factor());
  };

  SharedTerm regularizer;
  if (reg.reg_weight > 0.0 || reg.laplace_weight > 0.0) {
    regularizer = [reg](const ImageGrid& o) {
      ImageGrid g(o.rows(), o.cols());
      if (reg.reg_weight > 0.0) g += reg.reg_weight * btv_gradient(o, reg);
      if (reg.laplace_weight > 0.0) g += reg.laplace_weight * laplacian(laplacian(o));
      return g;
    };
  }
  return projected_gradient_loop(initial_estimate(frames), frames.size(), direction,
                                 plain, truth, regularizer);
}

}  // namespace dsr
