#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include <unistd.h>

#include "support.hpp"
#include "vidpipe/errors.hpp"
#include "vidpipe/pipeline.hpp"

using namespace vidpipe;
using namespace vidpipe::testing;

namespace {

// Scene boundaries [start, end) computed directly from the start list.
std::vector<std::pair<std::int64_t, std::int64_t>> spans_of(const SceneList &list, std::int64_t total) {
  std::set<std::int64_t> starts(list.starts().begin(), list.starts().end());
  starts.insert(0);
  std::vector<std::int64_t> v(starts.begin(), starts.end());
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], i + 1 < v.size() ? v[i + 1] : total);
  return out;
}

// What fuse should see: each scene's oracle runs, b at a time, padded by repeating the last run.
std::vector<FuseRecord> expected_fuses(const SceneList &list, std::int64_t total, int n, bool extra, int b) {
  std::vector<FuseRecord> out;
  for (const auto &[s, e] : spans_of(list, total)) {
    const auto runs = oracle_plan(e - s, n, extra);
    for (std::size_t first = 0; first < runs.size(); first += std::size_t(b)) {
      FuseRecord rec;
      rec.frames.assign(runs[0].inputs.size(), {});
      for (std::size_t j = 0; j < std::size_t(b); ++j) {
        const auto &run = runs[std::min(first + j, runs.size() - 1)];
        for (std::size_t k = 0; k < run.inputs.size(); ++k) rec.frames[k].push_back(s + run.inputs[k]);
      }
      out.push_back(rec);
    }
  }
  return out;
}

PipelineOptions options_for(const NetworkDescriptor &d, SceneSource scenes) {
  PipelineOptions o;
  o.descriptor = d;
  o.scenes = std::move(scenes);
  return o;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("vidpipe_pipeline_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("identity pass reproduces the input bytes") {
  std::mt19937 rng(101);
  for (int n : {1, 2, 3}) {
    for (int b : {1, 2, 4}) {
      for (const std::string chroma : {"420mpeg2", "444p10"}) {
        const int frames = 1 + int(rng() % 40);
        const auto input = random_y4m(8, 6, frames, rng, chroma);
        const auto scenes = random_scenes(frames, rng);
        auto d = descriptor(n, false, false, false, b);
        d.pixel_format = parse_chroma_tag(chroma).first;
        const auto r = run_bytes(input, options_for(d, scenes), identity_provider());
        CHECK(r.bytes == input);
        CHECK(r.stats.frames_in == frames);
        CHECK(r.stats.frames_out == frames);
        CHECK(r.stats.order_violations == 0);
      }
    }
  }
}

TEST_CASE("fuse sees the oracle grouping and every frame is extracted once") {
  std::mt19937 rng(202);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + int(rng() % 4);
    const int b = 1 + int(rng() % 3);
    const bool interp = rng() % 2;
    const bool extra = rng() % 2;
    const int frames = 1 + int(rng() % 50);
    const auto input = random_y4m(4, 4, frames, rng);
    const auto scenes = random_scenes(frames, rng);
    auto log = std::make_shared<Recording>();
    const auto r = run_bytes(input, options_for(descriptor(n, interp, extra, false, b), scenes),
                             recording_provider(identity_provider(), log));
    const auto expected = expected_fuses(scenes, frames, n, extra, b);
    REQUIRE(log->fused.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(log->fused[i].frames == expected[i].frames);

    std::vector<std::int64_t> all(static_cast<std::size_t>(frames));
    std::iota(all.begin(), all.end(), 0);
    CHECK(log->extracted == all);
    CHECK(r.stats.extract_calls == frames);
    CHECK(r.stats.frames_out == (interp ? 2 * frames : frames));
    CHECK(r.stats.scenes == std::int64_t(spans_of(scenes, frames).size()));
  }
}

TEST_CASE("shared and plain layouts produce identical output") {
  std::mt19937 rng(303);
  for (int n : {1, 2, 3}) {
    for (int b : {1, 2, 3}) {
      const int frames = 30 + int(rng() % 30);
      const auto input = random_y4m(6, 4, frames, rng);
      const auto scenes = random_scenes(frames, rng, 2);
      auto opt = options_for(descriptor(n, true, true, false, b), scenes);
      const auto shared = run_bytes(input, opt, blend_provider());
      opt.force_plain_layout = true;
      const auto plain = run_bytes(input, opt, blend_provider());
      CHECK(shared.bytes == plain.bytes);
      CHECK(plain.stats.shared_batches == 0);
      CHECK(shared.stats.shared_batches > 0);
      CHECK(shared.stats.store_copies == shared.stats.shared_batches);
      CHECK(shared.stats.max_shared_batch_items == n * b + 1);
      CHECK(plain.stats.max_plain_batch_items == b * (n + 1));
      CHECK(shared.stats.extract_calls == frames);
      CHECK(plain.stats.extract_calls == frames);
    }
  }
}

TEST_CASE("three-region ring") {
  std::mt19937 rng(404);
  const auto input = random_y4m(4, 4, 61, rng);
  auto opt = options_for(descriptor(3, true, true, false, 2), SceneList());
  const auto two = run_bytes(input, opt, blend_provider());
  opt.regions = 3;
  const auto three = run_bytes(input, opt, blend_provider());
  CHECK(two.bytes == three.bytes);
  CHECK(three.stats.store_slots == 3 * 6 + 1);
  opt.regions = 1;
  CHECK_THROWS_AS(run_bytes(input, opt, blend_provider()), InvalidConfig);
}

TEST_CASE("blend output accounting") {
  std::mt19937 rng(505);
  const int frames = 23;
  const auto input = random_y4m(4, 4, frames, rng);
  const SceneList scenes({5, 6, 17});
  std::vector<VideoFrame> written;
  auto opt = options_for(descriptor(3, true, true, false, 2), scenes);
  opt.on_write = [&](std::int64_t, const VideoFrame &f) { written.push_back(f); };
  const auto r = run_bytes(input, opt, blend_provider());
  REQUIRE(written.size() == 2 * frames);
  std::istringstream in_bytes(input), out_bytes(r.bytes);
  const auto [ih, inputs] = read_y4m(in_bytes);
  const auto [oh, outputs] = read_y4m(out_bytes);
  CHECK(oh.fps == FrameRate{50, 1});
  REQUIRE(outputs.size() == 2 * frames);
  for (std::int64_t p = 0; p < frames; ++p) CHECK(outputs[std::size_t(2 * p)].planes == inputs[std::size_t(p)].planes);
  for (std::int64_t last : {4, 5, 16, 22}) {
    CHECK(outputs[std::size_t(2 * last + 1)].planes == outputs[std::size_t(2 * last)].planes);
  }
}

TEST_CASE("write order and bounded buffering") {
  std::mt19937 rng(606);
  const int frames = 150;
  const auto input = random_y4m(4, 4, frames, rng);
  for (int b : {1, 4}) {
    std::vector<std::int64_t> order;
    auto opt = options_for(descriptor(3, true, true, false, b), SceneList());
    opt.on_write = [&](std::int64_t p, const VideoFrame &) { order.push_back(p); };
    const auto r = run_bytes(input, opt, blend_provider());
    REQUIRE(order.size() == 2 * frames);
    for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == std::int64_t(i));
    CHECK(r.stats.order_violations == 0);
    CHECK(r.stats.peak_buffered_frames <= 2 * 3 * b + 2);
    CHECK(r.stats.peak_cached_pyramids <= 2 * 3 * b + 2);
  }
}

TEST_CASE("scene detection drives grouping") {
  // four flat frames, then a jump: two scenes
  std::vector<float> levels{0.1f, 0.1f, 0.1f, 0.1f, 0.9f, 0.9f, 0.9f};
  StreamHeader h = parse_y4m_header("YUV4MPEG2 W8 H8 F25:1 C420 XCOLORRANGE=FULL");
  const auto input = to_y4m(h, flat_frames(levels));
  auto log = std::make_shared<Recording>();
  const auto r = run_bytes(input, options_for(descriptor(3, false, false), SceneDetect{0.3}),
                           recording_provider(identity_provider(), log));
  CHECK(r.bytes == input);
  CHECK(r.stats.scenes == 2);
  CHECK(log->fused.size() == 3);
  CHECK(log->fused[1].frames == std::vector<std::vector<std::int64_t>>{{1}, {2}, {3}});
}

TEST_CASE("errors surface from every stage") {
  std::mt19937 rng(707);
  const auto input = random_y4m(4, 4, 6, rng);
  SUBCASE("truncated input") {
    const auto cut = input.substr(0, input.size() - 3);
    CHECK_THROWS_AS(run_bytes(cut, options_for(descriptor(2, false, false), SceneList()), identity_provider()),
                    TruncatedFrame);
  }
  SUBCASE("scene list past the end") {
    CHECK_THROWS_AS(
        run_bytes(input, options_for(descriptor(2, false, false), SceneList({3, 9})), identity_provider()),
        RangeError);
  }
  SUBCASE("colorspace not offered") {
    auto d = descriptor(1, false, false);
    d.colorspaces = {ColorSpace::BT709};
    auto opt = options_for(d, SceneList());
    CHECK_THROWS_AS(run_bytes(input, opt, identity_provider()), UnsupportedColorspace);
    opt.colorspace = ColorSpace::BT709;
    CHECK_NOTHROW(run_bytes(input, opt, identity_provider()));
  }
  SUBCASE("backend returns the wrong number of frames") {
    class Short : public Backend {
     public:
      FeaturePyramid extract(const VideoFrame &f) override {
        return FeaturePyramid{{FeatureLevel{{f.planes.begin(), f.planes.end()}}}};
      }
      std::vector<std::vector<VideoFrame>> fuse(const FuseBatch &) override { return {{}}; }
    };
    const BackendProvider provider = [](const NetworkDescriptor &, ColorSpace) { return std::make_unique<Short>(); };
    CHECK_THROWS_AS(run_bytes(input, options_for(descriptor(2, false, false), SceneList()), provider), ShapeError);
  }
  SUBCASE("writer failure") {
    std::istringstream in(input);
    std::ostringstream out;
    out.setstate(std::ios::badbit);
    CHECK_THROWS_AS(run_stream(in, out, options_for(descriptor(1, false, false), SceneList()), identity_provider()),
                    IoError);
  }
}

TEST_CASE("empty stream writes only the header") {
  const std::string input = "YUV4MPEG2 W4 H4 F25:1 C420\n";
  const auto r = run_bytes(input, options_for(descriptor(2, true, true), SceneDetect{}), blend_provider());
  CHECK(r.bytes == "YUV4MPEG2 W4 H4 F50:1 C420\n");
  CHECK(r.stats.frames_out == 0);
}

TEST_CASE("colorspace and header helpers") {
  CHECK(auto_colorspace(720) == ColorSpace::BT709);
  CHECK(auto_colorspace(1080) == ColorSpace::BT709);
  CHECK(auto_colorspace(576) == ColorSpace::BT601);
  auto h = parse_y4m_header("YUV4MPEG2 W320 H240 F30000:1001 It C420");
  auto d = descriptor(1, false, false);
  d.scale_x = Rational(2);
  d.scale_y = Rational(2);
  const auto out = output_header(h, d);
  CHECK(out.width == 640);
  CHECK(out.height == 480);
  CHECK(out.fps == FrameRate{30000, 1001});
  CHECK(out.interlace == "t");
  auto di = descriptor(1, false, false);
  di.scale_y = Rational(2);
  CHECK(output_header(h, di).interlace == "p");
  CHECK(output_header(h, descriptor(2, true, true)).fps == FrameRate{60000, 1001});
}

TEST_CASE("descriptor overrides") {
  DescriptorOverrides o;
  o.n = 3;
  o.interpolation = true;
  o.extra_frame = true;
  const auto d = builtin_descriptor(o, Layout::YUV444);
  CHECK(d.n == 3);
  CHECK(d.pixel_format == Layout::YUV444);
  o.double_frame = true;
  o.interpolation = false;
  CHECK_THROWS_AS(builtin_descriptor(o, Layout::YUV420), InvalidConfig);

  const auto manifest = descriptor(2, true, true);
  DescriptorOverrides agree;
  agree.n = 2;
  agree.batch = 4;
  CHECK(merge_overrides(manifest, agree).batch == 4);
  DescriptorOverrides clash;
  clash.n = 3;
  CHECK_THROWS_AS(merge_overrides(manifest, clash), ConfigError);
  DescriptorOverrides scale;
  scale.scale_x = Rational(2);
  CHECK_THROWS_AS(merge_overrides(manifest, scale), ConfigError);
}

TEST_CASE("run_pipeline configuration checks") {
  TempDir dir;
  std::mt19937 rng(808);
  const auto input = random_y4m(4, 4, 9, rng);
  const auto in_path = dir.path / "in.y4m";
  std::ofstream(in_path, std::ios::binary) << input;

  PipelineConfig c;
  c.input = in_path.string();
  c.output = (dir.path / "out.y4m").string();
  c.overrides.n = 2;
  c.overrides.batch = 2;
  auto stats = run_pipeline(c);
  CHECK(stats.frames_out == 9);
  std::ifstream back(c.output, std::ios::binary);
  CHECK(std::string(std::istreambuf_iterator<char>(back), {}) == input);

  auto both = c;
  both.scene_list = dir.path / "scenes.txt";
  both.scene_threshold = 0.2;
  CHECK_THROWS_AS(run_pipeline(both), ConfigError);

  auto missing = c;
  missing.scene_list = dir.path / "nope.txt";
  CHECK_THROWS_AS(run_pipeline(missing), IoError);

  auto no_input = c;
  no_input.input = (dir.path / "absent.y4m").string();
  CHECK_THROWS_AS(run_pipeline(no_input), IoError);

  auto bad_model = c;
  bad_model.model = (dir.path / "model").string();
  CHECK_THROWS_AS(run_pipeline(bad_model), ManifestError);

  auto bad_threshold = c;
  bad_threshold.scene_threshold = 2.0;
  CHECK_THROWS_AS(run_pipeline(bad_threshold), InvalidConfig);

  std::filesystem::create_directories(dir.path / "blend");
  std::ofstream(dir.path / "blend" / "model.json") << R"({"model_id": "blend", "n": 2,
      "flags": {"interpolation": true, "extra_frame": true}})";
  auto manifest = c;
  manifest.model = (dir.path / "blend").string();
  manifest.overrides.n.reset();
  stats = run_pipeline(manifest);
  CHECK(stats.frames_out == 18);
  manifest.overrides.extra_frame = false;
  CHECK_THROWS_AS(run_pipeline(manifest), ConfigError);
}

TEST_CASE("BoundedQueue") {
  BoundedQueue<int> q(2);
  std::thread producer([&] {
    for (int i = 0; i < 100; ++i) q.push(i);
    q.close();
  });
  int expected = 0;
  while (auto v = q.pop()) CHECK(*v == expected++);
  producer.join();
  CHECK(expected == 100);
  CHECK_FALSE(q.push(1));

  BoundedQueue<int> aborted(1);
  aborted.push(1);
  aborted.abort();
  CHECK_FALSE(aborted.pop());
}
