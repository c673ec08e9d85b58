#include "dsr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsr/errors.hpp"
#include "dsr/fft.hpp"

namespace dsr {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void SceneSpec::validate() const {
  if (factor < 1) throw ConfigError("factor", "must be >= 1");
  if (truth.empty()) throw ConfigError("truth", "empty image");
  if (truth.rows() % factor != 0 || truth.cols() % factor != 0) {
    throw ConfigError("truth", "dimensions must be divisible by the SR factor");
  }
  for (double v : truth.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("truth", "values must lie in [0, 1]");
  }
  if (shifts.empty()) throw ConfigError("shifts", "at least one frame is required");
  if (shifts.size() != defocus.size()) {
    throw ConfigError("defocus", "need one defocus spec per shift");
  }
  for (const auto& s : shifts) {
    try {
      (void)s.scaled(factor);
    } catch (const DimensionError& e) {
      throw ConfigError("shifts", e.what());
    }
  }
  for (const auto& d : defocus) d.validate();
}

SceneSpec make_scene(ImageGrid truth, int factor, std::vector<ShiftVector> shifts,
                     const DefocusDraw& draw, std::uint64_t seed) {
  if (!(draw.blur_min <= draw.blur_max)) {
    throw ConfigError("blur_max", "must be >= blur_min");
  }
  SceneSpec scene;
  scene.truth = std::move(truth);
  scene.factor = factor;
  scene.shifts = std::move(shifts);
  scene.seed = seed;
  if (factor < 1) throw ConfigError("factor", "must be >= 1");
  const std::size_t lr_rows = scene.truth.rows() / factor;
  const std::size_t lr_cols = scene.truth.cols() / factor;
  for (std::size_t m = 0; m < scene.shifts.size(); ++m) {
    Rng rng(derive_seed(seed, m));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    DefocusSpec spec;
    spec.blur = draw.blur_min + unit(rng) * (draw.blur_max - draw.blur_min);
    spec.zones = draw.zones;
    spec.focal = draw.focal;
    spec.orientation = m % 2 == 0 ? Orientation::kVertical : Orientation::kHorizontal;
    const std::size_t extent =
        spec.orientation == Orientation::kVertical ? lr_rows : lr_cols;
    if (draw.zones < 1 || extent % draw.zones != 0) {
      throw ConfigError("zones", "frame extent " + std::to_string(extent) +
                                     " is not divisible by " + std::to_string(draw.zones));
    }
    spec.zone_width = static_cast<int>(extent / draw.zones);
    spec.psf_size = draw.psf_size;
    spec.pupil_grid = draw.pupil_grid;
    scene.defocus.push_back(spec);
  }
  scene.validate();
  return scene;
}

std::vector<Frame> generate_frames(const SceneSpec& scene) {
  scene.validate();
  const std::size_t count = scene.shifts.size();
  std::vector<std::shared_ptr<const BlurOperator>> blurs(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t m = 0; m < n; ++m) {
    blurs[m] = std::make_shared<const BlurOperator>(
        BlurOperator::from_spec(scene.lr_rows(), scene.lr_cols(), scene.defocus[m]));
  }
  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    FrameModel model(blurs[m], scene.shifts[m], scene.factor);
    ImageGrid data = frame_forward(model, scene.truth);
    frames.push_back({std::move(model), std::move(data)});
  }
  return frames;
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kNone: return "none";
    case NoiseKind::kPoisson: return "poisson";
    case NoiseKind::kGaussianSnr: return "gaussian";
  }
  return "none";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "none") return NoiseKind::kNone;
  if (s == "poisson") return NoiseKind::kPoisson;
  if (s == "gaussian" || s == "gaussianSnr") return NoiseKind::kGaussianSnr;
  throw ConfigError("noise", "expected none|poisson|gaussian, got '" + s + "'");
}

void NoiseSpec::validate() const {
  if (kind == NoiseKind::kPoisson && !(photon_budget > 0.0 && std::isfinite(photon_budget))) {
    throw ConfigError("photon_budget", "must be > 0 for Poisson noise");
  }
  if (kind == NoiseKind::kGaussianSnr && std::isnan(snr_db)) {
    throw ConfigError("snr_db", "must be a number");
  }
}

std::uint64_t sample_poisson(double mean, Rng& rng) {
  if (!(mean >= 0.0)) throw std::domain_error("sample_poisson: negative mean");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = unit(rng);
    while (p > limit) {
      ++k;
      p *= unit(rng);
    }
    return k;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const double v = std::round(mean + std::sqrt(mean) * normal(rng));
  return v <= 0.0 ? 0 : static_cast<std::uint64_t>(v);
}

ImageGrid add_poisson_noise(const ImageGrid& frame, const NoiseSpec& spec) {
  NoiseSpec checked = spec;
  checked.kind = NoiseKind::kPoisson;
  checked.validate();
  Rng rng(spec.seed);
  ImageGrid out(frame.rows(), frame.cols());
  const auto in = frame.values();
  auto o = out.values();
  for (std::size_t p = 0; p < in.size(); ++p) {
    if (in[p] < 0.0) throw std::domain_error("add_poisson_noise: negative pixel value");
    o[p] = static_cast<double>(sample_poisson(spec.photon_budget * in[p], rng)) /
           spec.photon_budget;
  }
  return out;
}

ImageGrid add_gaussian_noise_snr(const ImageGrid& frame, const NoiseSpec& spec) {
  double power = 0.0;
  for (double v : frame.values()) power += v * v;
  power /= static_cast<double>(frame.size());
  const double sigma = std::sqrt(power / std::pow(10.0, spec.snr_db / 10.0));
  if (sigma == 0.0) return frame;
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, sigma);
  ImageGrid out = frame;
  for (double& v : out.values()) v += normal(rng);
  return out;
}

ImageGrid add_noise(const ImageGrid& frame, const NoiseSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case NoiseKind::kNone: return frame;
    case NoiseKind::kPoisson: return add_poisson_noise(frame, spec);
    case NoiseKind::kGaussianSnr: return add_gaussian_noise_snr(frame, spec);
  }
  return frame;
}

void apply_noise(std::vector<Frame>& frames, const NoiseSpec& spec) {
  for (std::size_t m = 0; m < frames.size(); ++m) {
    NoiseSpec local = spec;
    local.seed = derive_seed(spec.seed, m);
    frames[m].data = add_noise(frames[m].data, local);
  }
}

double measured_snr_db(const ImageGrid& clean, const ImageGrid& noisy) {
  const ImageGrid residual = noisy - clean;
  double signal = 0.0;
  double noise = 0.0;
  for (double v : clean.values()) signal += v * v;
  for (double v : residual.values()) noise += v * v;
  return 10.0 * std::log10(signal / noise);
}

double butterworth_gain(double radius, double cutoff, int order) {
  return 1.0 / (1.0 + std::pow(radius / cutoff, 2.0 * order));
}

ImageGrid butterworth_window(const ImageGrid& frame, int order, double cutoff_fraction) {
  if (order < 1) throw ConfigError("window_order", "must be >= 1");
  if (!(cutoff_fraction > 0.0 && cutoff_fraction <= 1.0)) {
    throw ConfigError("window_cutoff", "must lie in (0, 1]");
  }
  const double cr = 0.5 * (static_cast<double>(frame.rows()) - 1.0);
  const double cc = 0.5 * (static_cast<double>(frame.cols()) - 1.0);
  const double cutoff =
      cutoff_fraction * 0.5 * static_cast<double>(std::min(frame.rows(), frame.cols()));
  ImageGrid out = frame;
  for (std::size_t r = 0; r < frame.rows(); ++r)
    for (std::size_t c = 0; c < frame.cols(); ++c)
      out(r, c) *= butterworth_gain(std::hypot(r - cr, c - cc), cutoff, order);
  return out;
}

namespace {

constexpr double kEdgeWidth = 1.2;  // SR pixels

double soft_step(double x) { return 0.5 * (1.0 + std::tanh(x / kEdgeWidth)); }

// Blend `value` into the image with coverage alpha(r, c) over a bounding box.
template <typename Coverage>
void paint(ImageGrid& image, double r0, double c0, double r1, double c1,
           double value, Coverage alpha) {
  const double pad = 4.0 * kEdgeWidth;
  const auto lo_r = static_cast<std::size_t>(std::max(0.0, std::floor(r0 - pad)));
  const auto lo_c = static_cast<std::size_t>(std::max(0.0, std::floor(c0 - pad)));
  const auto hi_r = static_cast<std::size_t>(
      std::min(static_cast<double>(image.rows()), std::ceil(r1 + pad)));
  const auto hi_c = static_cast<std::size_t>(
      std::min(static_cast<double>(image.cols()), std::ceil(c1 + pad)));
  for (std::size_t r = lo_r; r < hi_r; ++r)
    for (std::size_t c = lo_c; c < hi_c; ++c) {
      const double a = alpha(static_cast<double>(r), static_cast<double>(c));
      image(r, c) += a * (value - image(r, c));
    }
}

}  // namespace

ImageGrid resolution_target(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double margin_fraction) {
  constexpr double kBackground = 0.2;
  constexpr double kTextureContrast = 0.1;
  ImageGrid image(rows, cols, kBackground);
  const std::size_t side = std::min(rows, cols);
  if (side >= 8) {
    // Low-contrast surface texture up to half the Nyquist frequency.
    const ImageGrid texture =
        smooth_random_scene(rows, cols, derive_seed(seed, 1), static_cast<int>(side / 4) - 1);
    for (std::size_t p = 0; p < image.size(); ++p) {
      image.values()[p] += kTextureContrast * (texture.values()[p] - 0.5);
    }
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double margin = margin_fraction * static_cast<double>(std::min(rows, cols));
  const double top = margin;
  const double left = margin;
  const double height = static_cast<double>(rows) - 2.0 * margin;
  const double width = static_cast<double>(cols) - 2.0 * margin;
  if (height < 16.0 || width < 16.0) return image;

  constexpr double kCell = 56.0;
  const int cell_rows = std::max(1, static_cast<int>(height / kCell));
  const int cell_cols = std::max(1, static_cast<int>(width / kCell));
  const double ch = height / cell_rows;
  const double cw = width / cell_cols;
  const double periods[] = {5.0, 6.0, 8.0, 10.0, 12.0, 16.0};

  for (int i = 0; i < cell_rows; ++i) {
    for (int j = 0; j < cell_cols; ++j) {
      const double r0 = top + i * ch + 0.1 * ch;
      const double c0 = left + j * cw + 0.1 * cw;
      const double h = 0.8 * ch;
      const double w = 0.8 * cw;
      const double kind = unit(rng);
      if (kind < 0.5) {
        // Bar group.
        const double period = periods[static_cast<int>(unit(rng) * 6.0) % 6];
        const bool horizontal = unit(rng) < 0.5;
        const double value = 0.6 + 0.3 * unit(rng);
        const double extent = horizontal ? h : w;
        const int bars = std::max(1, static_cast<int>(extent / period) - 1);
        for (int b = 0; b < bars; ++b) {
          const double s0 = (horizontal ? r0 : c0) + b * period + 0.25 * period;
          const double s1 = s0 + 0.5 * period;
          if (horizontal) {
            paint(image, s0, c0, s1, c0 + w, value, [&](double r, double c) {
              return soft_step(r - s0) * soft_step(s1 - r) * soft_step(c - c0) *
                     soft_step(c0 + w - c);
            });
          } else {
            paint(image, r0, s0, r0 + h, s1, value, [&](double r, double c) {
              return soft_step(c - s0) * soft_step(s1 - c) * soft_step(r - r0) *
                     soft_step(r0 + h - r);
            });
          }
        }
      } else if (kind < 0.8) {
        // Disk cluster.
        const int disks = 1 + static_cast<int>(unit(rng) * 3.0);
        for (int d = 0; d < disks; ++d) {
          const double radius = 3.0 + unit(rng) * (0.25 * std::min(h, w) - 3.0);
          const double cy = r0 + radius + unit(rng) * std::max(0.0, h - 2 * radius);
          const double cx = c0 + radius + unit(rng) * std::max(0.0, w - 2 * radius);
          const double value = 0.35 + 0.55 * unit(rng);
          paint(image, cy - radius, cx - radius, cy + radius, cx + radius, value,
                [&](double r, double c) { return soft_step(radius - std::hypot(r - cy, c - cx)); });
        }
      } else {
        // Ring.
        const double outer = 0.45 * std::min(h, w);
        const double inner = outer * (0.4 + 0.3 * unit(rng));
        const double cy = r0 + 0.5 * h;
        const double cx = c0 + 0.5 * w;
        const double value = 0.5 + 0.4 * unit(rng);
        paint(image, cy - outer, cx - outer, cy + outer, cx + outer, value,
              [&](double r, double c) {
                const double d = std::hypot(r - cy, c - cx);
                return soft_step(d - inner) * soft_step(outer - d);
              });
      }
    }
  }
  return project_unit_interval(image);
}

ImageGrid smooth_random_scene(std::size_t rows, std::size_t cols, std::uint64_t seed,
                              int max_frequency) {
  if (max_frequency < 1 || 2 * static_cast<std::size_t>(max_frequency) >= std::min(rows, cols)) {
    throw ConfigError("max_frequency", "must lie in [1, min(rows, cols) / 2)");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<fft::Complex> field(rows * cols);
  for (auto& v : field) v = unit(rng);
  fft::transform_2d(field, rows, cols, false);
  auto signed_index = [](std::size_t k, std::size_t n) {
    return k <= n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
  };
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (std::abs(signed_index(r, rows)) > max_frequency ||
          std::abs(signed_index(c, cols)) > max_frequency) {
        field[r * cols + c] = 0.0;
      }
  fft::transform_2d(field, rows, cols, true);
  ImageGrid out(rows, cols);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t p = 0; p < field.size(); ++p) {
    out.values()[p] = field[p].real();
    lo = std::min(lo, field[p].real());
    hi = std::max(hi, field[p].real());
  }
  for (double& v : out.values()) v = 0.1 + 0.8 * (v - lo) / (hi - lo);
  return out;
}

}  // namespace dsr
