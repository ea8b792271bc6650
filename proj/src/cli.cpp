#include "vidpipe/cli.hpp"

#include <iostream>

#include <CLI11.hpp>

#include "vidpipe/errors.hpp"
#include "vidpipe/pipeline.hpp"

namespace vidpipe {

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

template <class T, class Parse>
std::optional<T> parsed(const std::string &text, Parse parse) {
  if (text.empty()) return std::nullopt;
  return parse(text);
}

}  // namespace

int cli_main(const std::vector<std::string> &args, std::ostream &diagnostics) {
  CLI::App app{"Scene-aware batched video enhancement over Y4M streams"};
  app.set_version_flag("--version", "vidpipe 0.1.0");

  PipelineConfig cfg;
  std::optional<int> n, batch;
  bool interpolation = false, extra_frame = false, double_frame = false;
  std::string scale_x, scale_y, colorspace = "auto", range, pixel_format, scene_list;
  std::optional<double> threshold;

  app.add_option("--in", cfg.input, "Input Y4M file, - for stdin")->default_val("-");
  app.add_option("--out", cfg.output, "Output Y4M file, - for stdout")->default_val("-");
  app.add_option("--model", cfg.model, "Model directory with model.json, or identity | blend")->default_val("identity");
  app.add_option("--n", n, "Frames consumed per inference run")->check(CLI::PositiveNumber);
  app.add_option("--batch", batch, "Runs per inference batch")->check(CLI::PositiveNumber);
  app.add_option("--scale-x", scale_x, "Horizontal scale factor (2, 3/2, 1.5)");
  app.add_option("--scale-y", scale_y, "Vertical scale factor");
  app.add_flag("--interpolation", interpolation, "Network produces intermediate frames");
  app.add_flag("--extra-frame", extra_frame, "Network takes n+1 input frames");
  app.add_flag("--double-frame", double_frame, "Network emits 2n frames per run");
  app.add_option("--colorspace", colorspace, "bt601 | bt709 | bt2020 | auto")
      ->check(CLI::IsMember({"bt601", "bt709", "bt2020", "auto"}, CLI::ignore_case));
  app.add_option("--range", range, "Override the stream's range: limited | full")
      ->check(CLI::IsMember({"limited", "full"}, CLI::ignore_case));
  app.add_option("--pixel-format", pixel_format, "Network-side pixel format: yuv420 | yuv444 | rgb")
      ->check(CLI::IsMember({"yuv420", "yuv444", "rgb"}, CLI::ignore_case));
  auto *list_opt = app.add_option("--scene-list", scene_list, "Scene-start frame indices, one per line");
  auto *thr_opt = app.add_option("--scene-detect-threshold", threshold, "Luma MAD threshold in (0,1]");
  list_opt->excludes(thr_opt);
  app.add_option("--regions", cfg.regions, "Frame-store ring regions")->default_val(2)->check(CLI::Range(2, 64));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    diagnostics << app.help();
    return 0;
  } catch (const CLI::CallForVersion &) {
    diagnostics << app.version() << '\n';
    return 0;
  } catch (const CLI::ParseError &e) {
    diagnostics << "vidpipe: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    auto &o = cfg.overrides;
    o.n = n;
    o.batch = batch;
    if (interpolation) o.interpolation = true;
    if (extra_frame) o.extra_frame = true;
    if (double_frame) o.double_frame = true;
    o.scale_x = parsed<Rational>(scale_x, parse_rational);
    o.scale_y = parsed<Rational>(scale_y, parse_rational);
    o.pixel_format = parsed<Layout>(pixel_format, parse_layout);
    if (colorspace != "auto" && colorspace != "AUTO") cfg.colorspace = parse_colorspace(colorspace);
    cfg.range = parsed<Range>(range, parse_range);
    if (!scene_list.empty()) cfg.scene_list = scene_list;
    cfg.scene_threshold = threshold;

    const auto stats = run_pipeline(cfg);
    diagnostics << "vidpipe: " << stats.frames_in << " frames in, " << stats.frames_out << " frames out, "
                << stats.scenes << " scene(s), " << stats.extract_calls << " extract calls\n";
    return 0;
  } catch (const Error &e) {
    diagnostics << "vidpipe: " << e.what() << '\n';
    return e.error_class() == ErrorClass::Config ? kExitConfig : kExitIo;
  } catch (const std::exception &e) {
    diagnostics << "vidpipe: " << e.what() << '\n';
    return kExitIo;
  }
}

int cli_main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cerr);
}

}  // namespace vidpipe
