#include <algorithm>
#include <string>

#include "dsr/errors.hpp"
#include "dsr/kernels.hpp"

namespace dsr::kernels::parallel {
namespace {

using Layout = ZoneKernelSet::Layout;

std::size_t wrap(std::int64_t index, std::size_t extent) {
  const auto n = static_cast<std::int64_t>(extent);
  const std::int64_t m = index % n;
  return static_cast<std::size_t>(m < 0 ? m + n : m);
}

void require_frame(const ZoneKernelSet& set, const ImageGrid& x) {
  if (x.rows() != set.rows() || x.cols() != set.cols()) {
    throw DimensionError("zone kernel: image " + std::to_string(x.rows()) +
                         "x" + std::to_string(x.cols()) +
                         " does not match frame " + std::to_string(set.rows()) +
                         "x" + std::to_string(set.cols()));
  }
}

// Periodic extension by `h` samples on every side.
template <typename T, typename Source>
std::vector<T> pad_periodic(std::size_t rows, std::size_t cols, int h,
                            Source at) {
  const std::size_t width = cols + 2 * h;
  std::vector<T> padded((rows + 2 * h) * width);
  for (std::size_t pr = 0; pr < rows + 2 * h; ++pr) {
    const std::size_t r = wrap(static_cast<std::int64_t>(pr) - h, rows);
    T* dst = padded.data() + pr * width;
    for (std::size_t pc = 0; pc < width; ++pc) {
      dst[pc] = at(r, wrap(static_cast<std::int64_t>(pc) - h, cols));
    }
  }
  return padded;
}

std::vector<double> pad_image(const ImageGrid& x, int h) {
  return pad_periodic<double>(x.rows(), x.cols(), h,
                              [&](std::size_t r, std::size_t c) { return x(r, c); });
}

// Forward zone convolution when the zone depends on the row only. For column
// bands the caller passes transposed data and transposed kernels.
ImageGrid row_band_convolve(const ImageGrid& x, const std::vector<std::int32_t>& band_zone,
                            int size, const double* weights) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  const int h = size / 2;
  const std::size_t width = cols + 2 * h;
  const std::vector<double> padded = pad_image(x, h);
  const std::size_t area = static_cast<std::size_t>(size) * size;
  ImageGrid out(rows, cols);
  const auto nrows = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < nrows; ++r) {
    double* acc = out.row(r);
    for (int i = 0; i < size; ++i) {
      const std::size_t source_row = wrap(r + h - i, rows);
      const double* k = weights + band_zone[source_row] * area + i * size;
      const double* prow = padded.data() + (r + 2 * h - i) * width;
      for (int j = 0; j < size; ++j) {
        const double w = k[j];
        const double* base = prow + 2 * h - j;
        for (std::size_t c = 0; c < cols; ++c) acc[c] += w * base[c];
      }
    }
  }
  return out;
}

ImageGrid row_band_correlate(const ImageGrid& y, const std::vector<std::int32_t>& band_zone,
                             int size, const double* weights) {
  const std::size_t rows = y.rows();
  const std::size_t cols = y.cols();
  const int h = size / 2;
  const std::size_t width = cols + 2 * h;
  const std::vector<double> padded = pad_image(y, h);
  const std::size_t area = static_cast<std::size_t>(size) * size;
  ImageGrid out(rows, cols);
  const auto nrows = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < nrows; ++s) {
    double* acc = out.row(s);
    const double* k = weights + band_zone[s] * area;
    for (int i = 0; i < size; ++i) {
      const double* prow = padded.data() + (s + i) * width;
      for (int j = 0; j < size; ++j) {
        const double w = k[i * size + j];
        const double* base = prow + j;
        for (std::size_t c = 0; c < cols; ++c) acc[c] += w * base[c];
      }
    }
  }
  return out;
}

}  // namespace

ImageGrid zone_convolve(const ZoneKernelSet& set, const ImageGrid& x) {
  require_frame(set, x);
  switch (set.layout()) {
    case Layout::kRowBands:
      return row_band_convolve(x, set.band_zone(), set.size(), set.kernel(0));
    case Layout::kColumnBands:
      return transpose(row_band_convolve(transpose(x), set.band_zone(), set.size(),
                                         set.kernel_transposed(0)));
    case Layout::kGeneral:
      break;
  }
  const std::size_t rows = set.rows();
  const std::size_t cols = set.cols();
  const int size = set.size();
  const int h = set.radius();
  const std::size_t width = cols + 2 * h;
  const std::size_t area = static_cast<std::size_t>(size) * size;
  const std::vector<double> padded = pad_image(x, h);
  const std::vector<std::int32_t> zones = pad_periodic<std::int32_t>(
      rows, cols, h, [&](std::size_t r, std::size_t c) { return set.zone_at(r, c); });
  const double* weights = set.kernel(0);
  ImageGrid out(rows, cols);
  const auto nrows = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < nrows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = 0; i < size; ++i) {
        const std::size_t offset = (r + 2 * h - i) * width + c + 2 * h;
        for (int j = 0; j < size; ++j) {
          acc += weights[zones[offset - j] * area + i * size + j] * padded[offset - j];
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

ImageGrid zone_correlate(const ZoneKernelSet& set, const ImageGrid& y) {
  require_frame(set, y);
  switch (set.layout()) {
    case Layout::kRowBands:
      return row_band_correlate(y, set.band_zone(), set.size(), set.kernel(0));
    case Layout::kColumnBands:
      return transpose(row_band_correlate(transpose(y), set.band_zone(), set.size(),
                                          set.kernel_transposed(0)));
    case Layout::kGeneral:
      break;
  }
  const std::size_t rows = set.rows();
  const std::size_t cols = set.cols();
  const int size = set.size();
  const int h = set.radius();
  const std::size_t width = cols + 2 * h;
  const std::vector<double> padded = pad_image(y, h);
  ImageGrid out(rows, cols);
  const auto nrows = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < nrows; ++s) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double* k = set.kernel(set.zone_at(s, c));
      double acc = 0.0;
      for (int i = 0; i < size; ++i) {
        const double* prow = padded.data() + (s + i) * width + c;
        for (int j = 0; j < size; ++j) acc += k[i * size + j] * prow[j];
      }
      out(s, c) = acc;
    }
  }
  return out;
}

ImageGrid shifted_downsample(const ImageGrid& x, PixelShift shift, int factor) {
  if (factor < 1) throw DimensionError("downsample: factor must be >= 1");
  const auto tau = static_cast<std::size_t>(factor);
  if (x.rows() % tau != 0 || x.cols() % tau != 0) {
    throw DimensionError("downsample: dimensions " + std::to_string(x.rows()) +
                         "x" + std::to_string(x.cols()) +
                         " not divisible by factor " + std::to_string(factor));
  }
  const std::size_t out_rows = x.rows() / tau;
  const std::size_t out_cols = x.cols() / tau;
  std::vector<std::size_t> source_col(x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    source_col[c] = wrap(static_cast<std::int64_t>(c) - shift.cols, x.cols());
  }
  const double scale = static_cast<double>(tau * tau);
  ImageGrid out(out_rows, out_cols);
  const auto nrows = static_cast<std::int64_t>(out_rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < nrows; ++i) {
    // Mean about each block's first sample, exact on constant blocks.
    std::vector<double> pivot(out_cols);
    const double* first = x.row(wrap(i * factor - shift.rows, x.rows()));
    for (std::size_t j = 0; j < out_cols; ++j) pivot[j] = first[source_col[j * tau]];
    double* acc = out.row(i);
    for (std::size_t a = 0; a < tau; ++a) {
      const double* src = x.row(wrap(i * factor + static_cast<std::int64_t>(a) - shift.rows, x.rows()));
      for (std::size_t j = 0; j < out_cols; ++j) {
        const std::size_t* cols = source_col.data() + j * tau;
        double s = acc[j];
        for (std::size_t b = 0; b < tau; ++b) s += src[cols[b]] - pivot[j];
        acc[j] = s;
      }
    }
    for (std::size_t j = 0; j < out_cols; ++j) acc[j] = pivot[j] + acc[j] / scale;
  }
  return out;
}

ImageGrid upsample_shifted(const ImageGrid& x, PixelShift shift, int factor) {
  if (factor < 1) throw DimensionError("upsample: factor must be >= 1");
  const auto tau = static_cast<std::size_t>(factor);
  const std::size_t rows = x.rows() * tau;
  const std::size_t cols = x.cols() * tau;
  std::vector<std::size_t> source_col(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    source_col[c] = wrap(static_cast<std::int64_t>(c) - shift.cols, cols) / tau;
  }
  ImageGrid out(rows, cols);
  const auto nrows = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < nrows; ++r) {
    const double* src = x.row(wrap(r - shift.rows, rows) / tau);
    double* dst = out.row(r);
    for (std::size_t c = 0; c < cols; ++c) dst[c] = src[source_col[c]];
  }
  return out;
}

void projected_step(const ImageGrid& base, const ImageGrid& direction,
                    double step, ImageGrid& out) {
  if (!base.same_shape(direction)) throw DimensionError("projected_step: shape mismatch");
  if (!out.same_shape(base)) out = ImageGrid(base.rows(), base.cols());
  const double* b = base.values().data();
  const double* d = direction.values().data();
  double* o = out.values().data();
  const auto n = static_cast<std::int64_t>(base.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) o[k] = std::clamp(b[k] - step * d[k], 0.0, 1.0);
}

}  // namespace dsr::kernels::parallel
