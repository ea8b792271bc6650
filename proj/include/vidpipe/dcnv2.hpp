#pragma once

// Modulated deformable convolution (v2), forward pass, CPU reference.
//
// Tensor conventions follow torchvision.ops.deform_conv2d:
//   input  [N, Cin, H, W]
//   offset [N, 2*dg*kh*kw, Hout, Wout]   channel 2*(g*kh*kw + t) + 0 is dy,
//                                        channel 2*(g*kh*kw + t) + 1 is dx,
//                                        for deform group g and tap t = ky*kw + kx
//   mask   [N, dg*kh*kw, Hout, Wout]     channel g*kh*kw + t
//   weight [Cout, Cin/groups, kh, kw]
//   bias   [Cout]
// Input channel c belongs to deform group c / (Cin/dg). Samples outside the
// input plane read as zero.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace vidpipe::dcn {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, float fill = 0.0f);

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  float &at(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    return data[((a * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }
  float at(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
    return data[((a * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }
};

struct DeformConvParams {
  int in_channels = 1;
  int out_channels = 1;
  std::array<int, 2> kernel{1, 1};
  std::array<int, 2> stride{1, 1};
  std::array<int, 2> padding{0, 0};
  std::array<int, 2> dilation{1, 1};
  int groups = 1;
  int deform_groups = 1;
};

struct DeformConvTensors {
  Tensor input;
  Tensor offset;
  Tensor mask;
  Tensor weight;
  std::vector<float> bias;
};

std::array<std::size_t, 2> output_size(const DeformConvParams &p, std::size_t height, std::size_t width);

// Throws ShapeError naming the offending tensor.
void check_shapes(const DeformConvTensors &t, const DeformConvParams &p);

// Bilinear read of a row-major [height, width] plane; neighbours outside the
// plane contribute 0.
float bilinear_sample(std::span<const float> plane, std::size_t height, std::size_t width, double y, double x);

Tensor deform_conv2d(const DeformConvTensors &t, const DeformConvParams &p);

}  // namespace vidpipe::dcn
