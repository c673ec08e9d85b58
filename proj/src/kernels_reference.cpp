#include <algorithm>
#include <string>

#include "dsr/errors.hpp"
#include "dsr/kernels.hpp"

namespace dsr::kernels {
namespace {

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

}  // namespace

ZoneKernelSet::ZoneKernelSet(std::size_t rows, std::size_t cols,
                             const std::vector<ImageGrid>& kernels,
                             std::vector<std::int32_t> zone_of)
    : rows_(rows), cols_(cols), zones_(kernels.size()),
      zone_of_(std::move(zone_of)) {
  if (kernels.empty()) throw DimensionError("ZoneKernelSet: no kernels");
  size_ = static_cast<int>(kernels.front().rows());
  if (size_ % 2 == 0) throw DimensionError("ZoneKernelSet: kernel size must be odd");
  if (static_cast<std::size_t>(size_) > rows || static_cast<std::size_t>(size_) > cols) {
    throw DimensionError("ZoneKernelSet: kernel larger than frame");
  }
  if (zone_of_.size() != rows * cols) {
    throw DimensionError("ZoneKernelSet: zone map size mismatch");
  }
  const std::size_t area = static_cast<std::size_t>(size_) * size_;
  weights_.reserve(zones_ * area);
  weights_t_.reserve(zones_ * area);
  for (const auto& k : kernels) {
    if (k.rows() != static_cast<std::size_t>(size_) || k.cols() != k.rows()) {
      throw DimensionError("ZoneKernelSet: kernels must share one odd square size");
    }
    weights_.insert(weights_.end(), k.values().begin(), k.values().end());
    for (int i = 0; i < size_; ++i)
      for (int j = 0; j < size_; ++j) weights_t_.push_back(k(j, i));
  }
  for (auto z : zone_of_) {
    if (z < 0 || static_cast<std::size_t>(z) >= zones_) {
      throw DimensionError("ZoneKernelSet: zone index out of range");
    }
  }

  auto rows_uniform = [&] {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 1; c < cols; ++c)
        if (zone_at(r, c) != zone_at(r, 0)) return false;
    return true;
  };
  auto cols_uniform = [&] {
    for (std::size_t r = 1; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        if (zone_at(r, c) != zone_at(0, c)) return false;
    return true;
  };
  if (rows_uniform()) {
    layout_ = Layout::kRowBands;
    for (std::size_t r = 0; r < rows; ++r) band_zone_.push_back(zone_at(r, 0));
  } else if (cols_uniform()) {
    layout_ = Layout::kColumnBands;
    for (std::size_t c = 0; c < cols; ++c) band_zone_.push_back(zone_at(0, c));
  } else {
    layout_ = Layout::kGeneral;
  }
}

namespace reference {

ImageGrid zone_convolve(const ZoneKernelSet& set, const ImageGrid& x) {
  require_frame(set, x);
  const std::size_t rows = set.rows();
  const std::size_t cols = set.cols();
  const int size = set.size();
  const int h = set.radius();
  ImageGrid out(rows, cols);
  for (std::size_t z = 0; z < set.zones(); ++z) {
    ImageGrid masked(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        if (set.zone_at(r, c) == static_cast<std::int32_t>(z)) masked(r, c) = x(r, c);
    const double* k = set.kernel(z);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        double acc = 0.0;
        for (int i = 0; i < size; ++i)
          for (int j = 0; j < size; ++j)
            acc += k[i * size + j] *
                   masked(wrap(static_cast<std::int64_t>(r) + h - i, rows),
                          wrap(static_cast<std::int64_t>(c) + h - j, cols));
        out(r, c) += acc;
      }
    }
  }
  return out;
}

ImageGrid zone_correlate(const ZoneKernelSet& set, const ImageGrid& y) {
  require_frame(set, y);
  const std::size_t rows = set.rows();
  const std::size_t cols = set.cols();
  const int size = set.size();
  const int h = set.radius();
  ImageGrid out(rows, cols);
  for (std::size_t z = 0; z < set.zones(); ++z) {
    const double* k = set.kernel(z);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (set.zone_at(r, c) != static_cast<std::int32_t>(z)) continue;
        double acc = 0.0;
        for (int i = 0; i < size; ++i)
          for (int j = 0; j < size; ++j)
            acc += k[i * size + j] *
                   y(wrap(static_cast<std::int64_t>(r) + i - h, rows),
                     wrap(static_cast<std::int64_t>(c) + j - h, cols));
        out(r, c) = acc;
      }
    }
  }
  return out;
}

ImageGrid shifted_downsample(const ImageGrid& x, PixelShift shift, int factor) {
  if (factor < 1) throw DimensionError("downsample: factor must be >= 1");
  const auto tau = static_cast<std::size_t>(factor);
  if (x.rows() % tau != 0 || x.cols() % tau != 0) {
    throw DimensionError("downsample: dimensions not divisible by factor");
  }
  const ImageGrid shifted = translate(x, shift);
  ImageGrid out(x.rows() / tau, x.cols() / tau);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      // Mean about the block's first sample, exact on constant blocks.
      const double pivot = shifted(i * tau, j * tau);
      double s = 0.0;
      for (std::size_t a = 0; a < tau; ++a)
        for (std::size_t b = 0; b < tau; ++b) s += shifted(i * tau + a, j * tau + b) - pivot;
      out(i, j) = pivot + s / static_cast<double>(tau * tau);
    }
  }
  return out;
}

ImageGrid upsample_shifted(const ImageGrid& x, PixelShift shift, int factor) {
  if (factor < 1) throw DimensionError("upsample: factor must be >= 1");
  const auto tau = static_cast<std::size_t>(factor);
  ImageGrid up(x.rows() * tau, x.cols() * tau);
  for (std::size_t r = 0; r < up.rows(); ++r)
    for (std::size_t c = 0; c < up.cols(); ++c) up(r, c) = x(r / tau, c / tau);
  return translate(up, shift);
}

}  // namespace reference
}  // namespace dsr::kernels
