#include "dsr/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsr/errors.hpp"

namespace dsr {
namespace {

void require_same_shape(const ImageGrid& a, const ImageGrid& b,
                        const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

std::size_t wrap(std::int64_t index, std::size_t extent) {
  const auto n = static_cast<std::int64_t>(extent);
  std::int64_t m = index % n;
  return static_cast<std::size_t>(m < 0 ? m + n : m);
}

}  // namespace

ImageGrid::ImageGrid(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("ImageGrid: dimensions must be positive");
  }
}

ImageGrid::ImageGrid(std::size_t rows, std::size_t cols,
                     std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("ImageGrid: dimensions must be positive");
  }
  if (data_.size() != rows * cols) {
    throw DimensionError("ImageGrid: data length " +
                         std::to_string(data_.size()) + " != rows*cols " +
                         std::to_string(rows * cols));
  }
}

ImageGrid ImageGrid::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t nrows = rows.size();
  const std::size_t ncols = nrows ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(nrows * ncols);
  for (const auto& r : rows) {
    if (r.size() != ncols) throw DimensionError("from_rows: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return ImageGrid(nrows, ncols, std::move(data));
}

double ImageGrid::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double ImageGrid::norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool ImageGrid::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

ImageGrid& ImageGrid::operator+=(const ImageGrid& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ImageGrid& ImageGrid::operator-=(const ImageGrid& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ImageGrid& ImageGrid::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

ImageGrid operator+(ImageGrid a, const ImageGrid& b) { return a += b; }
ImageGrid operator-(ImageGrid a, const ImageGrid& b) { return a -= b; }
ImageGrid operator*(double s, ImageGrid a) { return a *= s; }

PixelShift ShiftVector::scaled(int tau) const {
  const Fraction sx = vx * static_cast<std::int64_t>(tau);
  const Fraction sy = vy * static_cast<std::int64_t>(tau);
  if (sx.denominator() != 1 || sy.denominator() != 1) {
    throw DimensionError("shift (" + std::to_string(vx.numerator()) + "/" +
                         std::to_string(vx.denominator()) + ", " +
                         std::to_string(vy.numerator()) + "/" +
                         std::to_string(vy.denominator()) +
                         ") is not integral at factor " + std::to_string(tau));
  }
  return {sx.numerator(), sy.numerator()};
}

ImageGrid translate(const ImageGrid& image, PixelShift shift) {
  const std::size_t rows = image.rows();
  const std::size_t cols = image.cols();
  ImageGrid out(rows, cols);
  const std::size_t dc = wrap(shift.cols, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = image.row(wrap(static_cast<std::int64_t>(r) - shift.rows, rows));
    double* dst = out.row(r);
    // dst[c] = src[c - dc]: two contiguous runs.
    std::copy(src + (cols - dc), src + cols, dst);
    std::copy(src, src + (cols - dc), dst + dc);
  }
  return out;
}

ImageGrid project_unit_interval(const ImageGrid& image) {
  ImageGrid out = image;
  project_unit_interval_inplace(out);
  return out;
}

void project_unit_interval_inplace(ImageGrid& image) {
  for (double& v : image.values()) v = std::clamp(v, 0.0, 1.0);
}

double relative_rms(const ImageGrid& estimate, const ImageGrid& reference) {
  require_same_shape(estimate, reference, "relative_rms");
  double num = 0.0;
  double den = 0.0;
  const auto e = estimate.values();
  const auto r = reference.values();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double d = e[i] - r[i];
    num += d * d;
    den += r[i] * r[i];
  }
  if (den == 0.0) throw std::invalid_argument("relative_rms: zero-norm reference");
  return std::sqrt(num / den);
}

double inner_product(const ImageGrid& a, const ImageGrid& b) {
  require_same_shape(a, b, "inner_product");
  double s = 0.0;
  const auto x = a.values();
  const auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

ImageGrid crop(const ImageGrid& image, std::size_t r0, std::size_t c0,
               std::size_t rows, std::size_t cols) {
  if (r0 + rows > image.rows() || c0 + cols > image.cols()) {
    throw DimensionError("crop: window exceeds image");
  }
  ImageGrid out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(image.row(r0 + r) + c0, cols, out.row(r));
  }
  return out;
}

ImageGrid transpose(const ImageGrid& image) {
  ImageGrid out(image.cols(), image.rows());
  for (std::size_t r = 0; r < image.rows(); ++r)
    for (std::size_t c = 0; c < image.cols(); ++c) out(c, r) = image(r, c);
  return out;
}

}  // namespace dsr
