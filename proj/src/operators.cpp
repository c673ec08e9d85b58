#include "dsr/operators.hpp"

#include <string>

#include "dsr/errors.hpp"
#include "dsr/fft.hpp"

namespace dsr {
namespace {

void require_frame(const BlurOperator& op, const ImageGrid& image,
                   const char* what) {
  if (image.rows() != op.rows() || image.cols() != op.cols()) {
    throw DimensionError(std::string(what) + ": image " +
                         std::to_string(image.rows()) + "x" +
                         std::to_string(image.cols()) + " vs frame " +
                         std::to_string(op.rows()) + "x" +
                         std::to_string(op.cols()));
  }
}

void require_object(const FrameModel& model, const ImageGrid& object) {
  if (object.rows() != model.sr_rows() || object.cols() != model.sr_cols()) {
    throw DimensionError("frame model: object is " +
                         std::to_string(object.rows()) + "x" +
                         std::to_string(object.cols()) + ", expected " +
                         std::to_string(model.sr_rows()) + "x" +
                         std::to_string(model.sr_cols()));
  }
}

}  // namespace

ImageGrid downsample(const ImageGrid& image, int factor) {
  return kernels::parallel::shifted_downsample(image, {}, factor);
}

ImageGrid upsample(const ImageGrid& image, int factor) {
  return kernels::parallel::upsample_shifted(image, {}, factor);
}

ImageGrid convolve_same(const ImageGrid& image, const ImageGrid& kernel) {
  if (kernel.rows() % 2 == 0 || kernel.cols() % 2 == 0) {
    throw DimensionError("convolve_same: kernel must be odd-sized");
  }
  if (kernel.rows() > image.rows() || kernel.cols() > image.cols()) {
    throw DimensionError("convolve_same: kernel larger than image");
  }
  const std::size_t rows = image.rows();
  const std::size_t cols = image.cols();
  const std::size_t hr = kernel.rows() / 2;
  const std::size_t hc = kernel.cols() / 2;

  std::vector<fft::Complex> x(rows * cols);
  std::vector<fft::Complex> k(rows * cols);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = image.values()[i];
  for (std::size_t i = 0; i < kernel.rows(); ++i)
    for (std::size_t j = 0; j < kernel.cols(); ++j)
      k[((i + rows - hr) % rows) * cols + (j + cols - hc) % cols] += kernel(i, j);

  fft::transform_2d(x, rows, cols, false);
  fft::transform_2d(k, rows, cols, false);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= k[i];
  fft::transform_2d(x, rows, cols, true);

  ImageGrid out(rows, cols);
  const double scale = 1.0 / static_cast<double>(rows * cols);
  for (std::size_t i = 0; i < x.size(); ++i) out.values()[i] = x[i].real() * scale;
  return out;
}

ImageGrid flip(const ImageGrid& kernel) {
  ImageGrid out(kernel.rows(), kernel.cols());
  for (std::size_t i = 0; i < kernel.rows(); ++i)
    for (std::size_t j = 0; j < kernel.cols(); ++j)
      out(kernel.rows() - 1 - i, kernel.cols() - 1 - j) = kernel(i, j);
  return out;
}

BlurOperator::BlurOperator(PsfStack stack, ZoneMasks masks)
    : stack_(std::move(stack)), masks_(std::move(masks)) {
  if (stack_.size() == 0) throw DimensionError("BlurOperator: empty PSF stack");
  if (stack_.size() != masks_.size()) {
    throw DimensionError("BlurOperator: " + std::to_string(stack_.size()) +
                         " kernels but " + std::to_string(masks_.size()) +
                         " masks");
  }
  rows_ = masks_.masks.front().rows();
  cols_ = masks_.masks.front().cols();
  std::vector<std::int32_t> zone_of(rows_ * cols_, -1);
  for (std::size_t n = 0; n < masks_.size(); ++n) {
    const ImageGrid& mask = masks_.masks[n];
    if (mask.rows() != rows_ || mask.cols() != cols_) {
      throw DimensionError("BlurOperator: masks differ in size");
    }
    for (std::size_t p = 0; p < mask.size(); ++p) {
      const double v = mask.values()[p];
      if (v == 0.0) continue;
      if (v != 1.0 || zone_of[p] != -1) {
        throw DimensionError("BlurOperator: masks must be binary and disjoint");
      }
      zone_of[p] = static_cast<std::int32_t>(n);
    }
  }
  for (auto z : zone_of) {
    if (z < 0) throw DimensionError("BlurOperator: masks do not cover the frame");
  }
  kernel_set_ = kernels::ZoneKernelSet(rows_, cols_, stack_.kernels, std::move(zone_of));
}

BlurOperator BlurOperator::identity(std::size_t rows, std::size_t cols) {
  BlurOperator op(PsfStack{{ImageGrid(1, 1, 1.0)}},
                  ZoneMasks{{ImageGrid(rows, cols, 1.0)}});
  op.identity_ = true;
  return op;
}

BlurOperator BlurOperator::from_spec(std::size_t rows, std::size_t cols,
                                     const DefocusSpec& spec) {
  return BlurOperator(build_psf_stack(spec), build_zone_masks(rows, cols, spec));
}

ImageGrid BlurOperator::apply(const ImageGrid& image) const {
  require_frame(*this, image, "blur_apply");
  if (identity_) return image;
  return kernels::parallel::zone_convolve(kernel_set_, image);
}

ImageGrid BlurOperator::adjoint(const ImageGrid& image) const {
  require_frame(*this, image, "blur_adjoint");
  if (identity_) return image;
  return kernels::parallel::zone_correlate(kernel_set_, image);
}

ImageGrid blur_apply(const BlurOperator& op, const ImageGrid& image) {
  return op.apply(image);
}

ImageGrid blur_adjoint(const BlurOperator& op, const ImageGrid& image) {
  return op.adjoint(image);
}

FrameModel::FrameModel(std::shared_ptr<const BlurOperator> blur,
                       ShiftVector shift, int factor)
    : blur_(std::move(blur)), shift_(shift), factor_(factor) {
  if (!blur_) throw std::invalid_argument("FrameModel: null blur operator");
  if (factor_ < 1) throw ConfigError("factor", "must be >= 1");
  sr_shift_ = shift_.scaled(factor_);
}

FrameModel FrameModel::without_blur() const {
  return FrameModel(
      std::make_shared<const BlurOperator>(BlurOperator::identity(lr_rows(), lr_cols())),
      shift_, factor_);
}

ImageGrid frame_forward(const FrameModel& model, const ImageGrid& object) {
  require_object(model, object);
  return model.blur().apply(
      kernels::parallel::shifted_downsample(object, model.sr_shift(), model.factor()));
}

ImageGrid frame_gradient(const FrameModel& model, const ImageGrid& object,
                         const ImageGrid& observed) {
  require_object(model, object);
  require_frame(model.blur(), observed, "frame_gradient");
  const ImageGrid x =
      kernels::parallel::shifted_downsample(object, model.sr_shift(), model.factor());
  ImageGrid residual = model.blur().apply(x);
  residual -= observed;
  return kernels::parallel::upsample_shifted(model.blur().adjoint(residual),
                                             -model.sr_shift(), model.factor());
}

}  // namespace dsr
