#pragma once

#include <cstddef>
#include <memory>

#include "dsr/image.hpp"
#include "dsr/kernels.hpp"
#include "dsr/optics.hpp"

namespace dsr {

// Block average over factor x factor blocks.
ImageGrid downsample(const ImageGrid& image, int factor);

// Block-constant replication. downsample(upsample(u, t), t) == u exactly;
// note upsample == factor^2 * adjoint(downsample).
ImageGrid upsample(const ImageGrid& image, int factor);

// Periodic 2D convolution with a centered odd kernel, computed by DFT.
ImageGrid convolve_same(const ImageGrid& image, const ImageGrid& kernel);

// 180 degree rotation.
ImageGrid flip(const ImageGrid& kernel);

// Nonuniform blur sum_n (mask_n * x) conv psf_n on a fixed LR frame.
// Masks must partition the frame.
class BlurOperator {
 public:
  BlurOperator(PsfStack stack, ZoneMasks masks);

  static BlurOperator identity(std::size_t rows, std::size_t cols);
  static BlurOperator from_spec(std::size_t rows, std::size_t cols,
                                const DefocusSpec& spec);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t zones() const { return stack_.size(); }
  bool is_identity() const { return identity_; }
  const PsfStack& stack() const { return stack_; }
  const ZoneMasks& masks() const { return masks_; }
  const kernels::ZoneKernelSet& kernel_set() const { return kernel_set_; }

  ImageGrid apply(const ImageGrid& image) const;
  ImageGrid adjoint(const ImageGrid& image) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  bool identity_ = false;
  PsfStack stack_;
  ZoneMasks masks_;
  kernels::ZoneKernelSet kernel_set_;
};

ImageGrid blur_apply(const BlurOperator& op, const ImageGrid& image);
ImageGrid blur_adjoint(const BlurOperator& op, const ImageGrid& image);

// One LR frame's imaging chain blur o downsample o translate(factor * shift).
class FrameModel {
 public:
  FrameModel(std::shared_ptr<const BlurOperator> blur, ShiftVector shift,
             int factor);

  const BlurOperator& blur() const { return *blur_; }
  const std::shared_ptr<const BlurOperator>& blur_ptr() const { return blur_; }
  const ShiftVector& shift() const { return shift_; }
  int factor() const { return factor_; }
  PixelShift sr_shift() const { return sr_shift_; }

  std::size_t lr_rows() const { return blur_->rows(); }
  std::size_t lr_cols() const { return blur_->cols(); }
  std::size_t sr_rows() const { return blur_->rows() * factor_; }
  std::size_t sr_cols() const { return blur_->cols() * factor_; }

  // Same geometry with the blur replaced by the identity.
  FrameModel without_blur() const;

 private:
  std::shared_ptr<const BlurOperator> blur_;
  ShiftVector shift_;
  int factor_;
  PixelShift sr_shift_;
};

// blur(downsample(translate(object, factor * shift)))
ImageGrid frame_forward(const FrameModel& model, const ImageGrid& object);

// translate(upsample(B^T (B x - observed)), -factor * shift) with
// x = downsample(translate(object, factor * shift)). This is factor^2 times
// the exact gradient of 0.5 * ||frame_forward(object) - observed||^2.
ImageGrid frame_gradient(const FrameModel& model, const ImageGrid& object,
                         const ImageGrid& observed);

}  // namespace dsr
