#pragma once

// Test-only helpers and independent oracles. Nothing here calls into the
// code paths it is used to check.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vidpipe/backend.hpp"
#include "vidpipe/dcnv2.hpp"
#include "vidpipe/grouper.hpp"
#include "vidpipe/pipeline.hpp"
#include "vidpipe/y4m.hpp"

namespace vidpipe::testing {

// ---------------------------------------------------------------------------------------------------------------------
// Grouping oracle: materialize the scene and apply the rules literally.

struct OracleRun {
  std::vector<std::int64_t> inputs;
  std::vector<std::int64_t> fresh;  // frames whose outputs are emitted
};

inline std::vector<OracleRun> oracle_plan(std::int64_t m, int n, bool extra_frame) {
  std::vector<std::int64_t> scene(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) scene[std::size_t(i)] = i;

  // Chop the scene into consecutive groups of n.
  std::vector<std::vector<std::int64_t>> groups;
  for (std::size_t i = 0; i < scene.size(); i += std::size_t(n)) {
    groups.emplace_back(scene.begin() + std::ptrdiff_t(i),
                        scene.begin() + std::ptrdiff_t(std::min(scene.size(), i + std::size_t(n))));
  }

  std::vector<OracleRun> runs;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    OracleRun run;
    run.fresh = groups[g];
    std::vector<std::int64_t> consumed = groups[g];
    if (consumed.size() < std::size_t(n) && g > 0) {
      // recycle: borrow trailing frames of the previous group, in order
      const auto &prev = groups[g - 1];
      std::vector<std::int64_t> borrowed(prev.end() - std::ptrdiff_t(std::size_t(n) - consumed.size()), prev.end());
      borrowed.insert(borrowed.end(), consumed.begin(), consumed.end());
      consumed = borrowed;
    }
    while (consumed.size() < std::size_t(n)) consumed.push_back(consumed.back());  // duplicate the last frame
    run.inputs = consumed;
    if (extra_frame) {
      const std::int64_t next = consumed.back() + 1;
      run.inputs.push_back(next < m ? next : consumed.back());
    }
    runs.push_back(run);
  }
  return runs;
}

// ---------------------------------------------------------------------------------------------------------------------
// Direct grouped convolution with zero padding.

inline dcn::Tensor direct_conv2d(const dcn::Tensor &x, const dcn::Tensor &w, const std::vector<float> &bias,
                                 const dcn::DeformConvParams &p) {
  const long N = long(x.shape[0]), C = long(x.shape[1]), H = long(x.shape[2]), W = long(x.shape[3]);
  const long KH = p.kernel[0], KW = p.kernel[1];
  const long HO = (H + 2 * p.padding[0] - p.dilation[0] * (KH - 1) - 1) / p.stride[0] + 1;
  const long WO = (W + 2 * p.padding[1] - p.dilation[1] * (KW - 1) - 1) / p.stride[1] + 1;
  const long CO = p.out_channels;
  const long cin_g = C / p.groups, cout_g = CO / p.groups;
  dcn::Tensor y({std::size_t(N), std::size_t(CO), std::size_t(HO), std::size_t(WO)});
  for (long b = 0; b < N; ++b)
    for (long co = 0; co < CO; ++co)
      for (long i = 0; i < HO; ++i)
        for (long j = 0; j < WO; ++j) {
          double acc = bias.empty() ? 0.0 : bias[std::size_t(co)];
          const long g = co / cout_g;
          for (long c = 0; c < cin_g; ++c)
            for (long ky = 0; ky < KH; ++ky)
              for (long kx = 0; kx < KW; ++kx) {
                const long yy = i * p.stride[0] - p.padding[0] + ky * p.dilation[0];
                const long xx = j * p.stride[1] - p.padding[1] + kx * p.dilation[1];
                if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
                acc += double(w.at(std::size_t(co), std::size_t(c), std::size_t(ky), std::size_t(kx))) *
                       x.at(std::size_t(b), std::size_t(g * cin_g + c), std::size_t(yy), std::size_t(xx));
              }
          y.at(std::size_t(b), std::size_t(co), std::size_t(i), std::size_t(j)) = float(acc);
        }
  return y;
}

inline dcn::Tensor random_tensor(std::vector<std::size_t> dims, std::mt19937 &rng, float lo = -1.f, float hi = 1.f) {
  dcn::Tensor t(std::move(dims));
  std::uniform_real_distribution<float> dist(lo, hi);
  for (auto &v : t.data) v = dist(rng);
  return t;
}

// ---------------------------------------------------------------------------------------------------------------------
// Streams

// A Y4M byte stream with uniformly random sample codes.
inline std::string random_y4m(int width, int height, int frames, std::mt19937 &rng,
                              const std::string &chroma = "420mpeg2", const std::string &extra_params = "") {
  const auto [layout, depth] = parse_chroma_tag(chroma);
  const std::size_t luma = std::size_t(width) * std::size_t(height);
  const std::size_t chroma_samples = layout == Layout::YUV420 ? luma / 4 : luma;
  const std::size_t samples = luma + 2 * chroma_samples;
  std::string out = "YUV4MPEG2 W" + std::to_string(width) + " H" + std::to_string(height) +
                    " F25:1 Ip A1:1 C" + chroma + extra_params + "\n";
  std::uniform_int_distribution<int> code(0, (1 << depth) - 1);
  for (int f = 0; f < frames; ++f) {
    out += "FRAME\n";
    for (std::size_t s = 0; s < samples; ++s) {
      const int v = code(rng);
      out += char(v & 0xff);
      if (depth > 8) out += char(v >> 8);
    }
  }
  return out;
}

// Frames whose luma is the constant `level` and chroma neutral.
inline std::vector<VideoFrame> flat_frames(const std::vector<float> &levels, int width = 8, int height = 8) {
  std::vector<VideoFrame> frames;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    auto f = VideoFrame::blank(width, height, PixelFormat{Layout::YUV420, 8, Range::Full}, ColorSpace::BT601,
                               levels[i]);
    f.frame_index = std::int64_t(i);
    frames.push_back(std::move(f));
  }
  return frames;
}

inline std::string to_y4m(const StreamHeader &h, const std::vector<VideoFrame> &frames) {
  std::ostringstream out;
  write_y4m(out, h, frames);
  return out.str();
}

// ---------------------------------------------------------------------------------------------------------------------
// Instrumented backend

struct FuseRecord {
  // frames[slot][lane] stream indices as seen by fuse
  std::vector<std::vector<std::int64_t>> frames;
};

struct Recording {
  std::vector<std::int64_t> extracted;
  std::vector<FuseRecord> fused;
};

class RecordingBackend : public Backend {
 public:
  RecordingBackend(std::unique_ptr<Backend> inner, std::shared_ptr<Recording> log)
      : inner_(std::move(inner)), log_(std::move(log)) {}

  FeaturePyramid extract(const VideoFrame &frame) override {
    log_->extracted.push_back(frame.frame_index);
    return inner_->extract(frame);
  }

  std::vector<std::vector<VideoFrame>> fuse(const FuseBatch &batch) override {
    FuseRecord rec;
    for (int k = 0; k < batch.slot_count(); ++k) {
      std::vector<std::int64_t> lanes;
      for (int j = 0; j < batch.lane_count(); ++j) lanes.push_back(batch.frame(k, j));
      rec.frames.push_back(lanes);
    }
    log_->fused.push_back(std::move(rec));
    return inner_->fuse(batch);
  }

 private:
  std::unique_ptr<Backend> inner_;
  std::shared_ptr<Recording> log_;
};

// Random scene starts for a stream of `frames` frames.
inline SceneList random_scenes(std::int64_t frames, std::mt19937 &rng, int max_cuts = 6) {
  std::vector<std::int64_t> starts;
  const int cuts = int(rng() % std::uint32_t(max_cuts + 1));
  for (int i = 0; i < cuts; ++i) starts.push_back(std::int64_t(rng() % std::uint64_t(frames)));
  return SceneList(starts);
}

struct RunResult {
  std::string bytes;
  PipelineStats stats;
};

inline RunResult run_bytes(const std::string &input, const PipelineOptions &options, const BackendProvider &provider) {
  std::istringstream in(input);
  std::ostringstream out;
  RunResult r;
  r.stats = run_stream(in, out, options, provider);
  r.bytes = out.str();
  return r;
}

inline BackendProvider identity_provider() {
  return [](const NetworkDescriptor &d, ColorSpace cs) { return identity_backend(d, cs); };
}

inline BackendProvider blend_provider() {
  return [](const NetworkDescriptor &d, ColorSpace cs) { return blend_backend(d, cs); };
}

inline BackendProvider recording_provider(BackendProvider inner, std::shared_ptr<Recording> log) {
  return [inner, log](const NetworkDescriptor &d, ColorSpace cs) -> std::unique_ptr<Backend> {
    return std::make_unique<RecordingBackend>(inner(d, cs), log);
  };
}

inline NetworkDescriptor descriptor(int n, bool interp, bool extra, bool dbl = false, int batch = 1) {
  NetworkDescriptor d;
  d.n = n;
  d.flags = {interp, extra, dbl};
  d.batch = batch;
  return d;
}

}  // namespace vidpipe::testing
