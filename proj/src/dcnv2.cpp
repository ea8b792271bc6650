#include "vidpipe/dcnv2.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "vidpipe/errors.hpp"

namespace vidpipe::dcn {

namespace {

std::string dims_str(const std::vector<std::size_t> &dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
  return s + "]";
}

void expect(const Tensor &t, const char *name, const std::vector<std::size_t> &dims) {
  if (t.shape != dims || t.data.size() != std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                                          std::multiplies<>())) {
    throw ShapeError(std::string(name) + " is " + dims_str(t.shape) + ", expected " + dims_str(dims));
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims, float fill) : shape(std::move(dims)) {
  data.assign(std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>()), fill);
}

std::array<std::size_t, 2> output_size(const DeformConvParams &p, std::size_t height, std::size_t width) {
  const auto extent = [](std::size_t in, int k, int s, int pad, int d) -> std::size_t {
    const long long span = (long long)in + 2LL * pad - (long long)d * (k - 1) - 1;
    if (span < 0) throw ShapeError("kernel larger than padded input");
    return std::size_t(span / s + 1);
  };
  return {extent(height, p.kernel[0], p.stride[0], p.padding[0], p.dilation[0]),
          extent(width, p.kernel[1], p.stride[1], p.padding[1], p.dilation[1])};
}

void check_shapes(const DeformConvTensors &t, const DeformConvParams &p) {
  if (p.in_channels < 1 || p.out_channels < 1 || p.groups < 1 || p.deform_groups < 1) {
    throw ShapeError("channel and group counts must be positive");
  }
  if (p.in_channels % p.groups || p.out_channels % p.groups) {
    throw ShapeError("channels not divisible by groups=" + std::to_string(p.groups));
  }
  if (p.in_channels % p.deform_groups) {
    throw ShapeError("in_channels not divisible by deform_groups=" + std::to_string(p.deform_groups));
  }
  for (int i = 0; i < 2; ++i) {
    if (p.kernel[i] < 1 || p.stride[i] < 1 || p.dilation[i] < 1 || p.padding[i] < 0) {
      throw ShapeError("kernel, stride and dilation must be positive, padding non-negative");
    }
  }
  if (t.input.shape.size() != 4) throw ShapeError("input must be 4-D, got " + dims_str(t.input.shape));
  const std::size_t n = t.input.dim(0);
  const std::size_t cin = std::size_t(p.in_channels);
  expect(t.input, "input", {n, cin, t.input.dim(2), t.input.dim(3)});
  const auto [ho, wo] = output_size(p, t.input.dim(2), t.input.dim(3));
  const std::size_t taps = std::size_t(p.kernel[0] * p.kernel[1]);
  const std::size_t dg = std::size_t(p.deform_groups);
  expect(t.offset, "offset", {n, 2 * dg * taps, ho, wo});
  expect(t.mask, "mask", {n, dg * taps, ho, wo});
  expect(t.weight, "weight",
         {std::size_t(p.out_channels), cin / std::size_t(p.groups), std::size_t(p.kernel[0]), std::size_t(p.kernel[1])});
  if (!t.bias.empty() && t.bias.size() != std::size_t(p.out_channels)) {
    throw ShapeError("bias has " + std::to_string(t.bias.size()) + " entries, expected " +
                     std::to_string(p.out_channels));
  }
}

float bilinear_sample(std::span<const float> plane, std::size_t height, std::size_t width, double y, double x) {
  const double fy = std::floor(y);
  const double fx = std::floor(x);
  const double ly = y - fy;
  const double lx = x - fx;
  const long long y0 = (long long)fy;
  const long long x0 = (long long)fx;
  const auto read = [&](long long yy, long long xx) -> double {
    if (yy < 0 || xx < 0 || yy >= (long long)height || xx >= (long long)width) return 0.0;
    return plane[std::size_t(yy) * width + std::size_t(xx)];
  };
  double v = 0.0;
  if (ly < 1.0 && lx < 1.0) v += (1 - ly) * (1 - lx) * read(y0, x0);
  if (lx > 0.0) v += (1 - ly) * lx * read(y0, x0 + 1);
  if (ly > 0.0) v += ly * (1 - lx) * read(y0 + 1, x0);
  if (ly > 0.0 && lx > 0.0) v += ly * lx * read(y0 + 1, x0 + 1);
  return float(v);
}

Tensor deform_conv2d(const DeformConvTensors &t, const DeformConvParams &p) {
  check_shapes(t, p);
  const std::size_t batch = t.input.dim(0);
  const std::size_t h = t.input.dim(2);
  const std::size_t w = t.input.dim(3);
  const auto [ho, wo] = output_size(p, h, w);
  const std::size_t kh = std::size_t(p.kernel[0]);
  const std::size_t kw = std::size_t(p.kernel[1]);
  const std::size_t taps = kh * kw;
  const std::size_t cin_per_group = std::size_t(p.in_channels / p.groups);
  const std::size_t cout_per_group = std::size_t(p.out_channels / p.groups);
  const std::size_t cin_per_dgroup = std::size_t(p.in_channels / p.deform_groups);

  Tensor out({batch, std::size_t(p.out_channels), ho, wo});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < std::size_t(p.out_channels); ++co) {
      const std::size_t group = co / cout_per_group;
      for (std::size_t i = 0; i < ho; ++i) {
        for (std::size_t j = 0; j < wo; ++j) {
          double acc = t.bias.empty() ? 0.0 : t.bias[co];
          for (std::size_t cg = 0; cg < cin_per_group; ++cg) {
            const std::size_t ci = group * cin_per_group + cg;
            const std::size_t dgrp = ci / cin_per_dgroup;
            const std::span<const float> plane(t.input.data.data() + (b * std::size_t(p.in_channels) + ci) * h * w,
                                               h * w);
            for (std::size_t ky = 0; ky < kh; ++ky) {
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const std::size_t tap = ky * kw + kx;
                const double dy = t.offset.at(b, 2 * (dgrp * taps + tap), i, j);
                const double dx = t.offset.at(b, 2 * (dgrp * taps + tap) + 1, i, j);
                const double m = t.mask.at(b, dgrp * taps + tap, i, j);
                const double py = double(i) * p.stride[0] - p.padding[0] + double(ky) * p.dilation[0] + dy;
                const double px = double(j) * p.stride[1] - p.padding[1] + double(kx) * p.dilation[1] + dx;
                acc += double(t.weight.at(co, cg, ky, kx)) * m * bilinear_sample(plane, h, w, py, px);
              }
            }
          }
          out.at(b, co, i, j) = float(acc);
        }
      }
    }
  }
  return out;
}

}  // namespace vidpipe::dcn
