#include "vpfix/tools/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <future>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "json_config.hpp"
#include "vpfix/annotation.hpp"
#include "vpfix/atomic_file.hpp"
#include "vpfix/dataset_pipeline.hpp"
#include "vpfix/error.hpp"
#include "vpfix/eval_metrics.hpp"
#include "vpfix/image_io.hpp"
#include "vpfix/mask_builder.hpp"
#include "vpfix/serialization.hpp"
#include "vpfix/tools/grad_check.hpp"
#include "vpfix/tools/predictors.hpp"
#include "vpfix/tools/service.hpp"
#include "vpfix/version.hpp"

namespace vpfix::tools {
namespace fs = std::filesystem;

namespace {

struct Outcome {
  Json json;
  std::string text;
  int exit = kExitOk;
};

struct Globals {
  std::uint64_t seed = 42;
  bool json = false;
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

void write_json_file(const fs::path& path, const Json& j) {
  io::write_file_atomic(path, j.dump(2) + "\n");
}

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

RansacConfig load_ransac(const std::string& file, std::uint64_t seed) {
  RansacConfig cfg;
  if (!file.empty()) cfg = ransac_config_from_json(read_json_file(file));
  cfg.rng_seed = seed;
  cfg.validate();
  return cfg;
}

// ---- score ----

struct ScoreArgs {
  std::string pred, gt, vps;
  double theta_deg = 5.0;
  double k = 50.0;
  std::string mode = "sigmoid";
  double epsilon = 1e-4;
  bool normalize = false;
};

Outcome cmd_score(const ScoreArgs& a) {
  VpLossConfig cfg;
  cfg.theta_thresh = deg_to_rad(a.theta_deg);
  cfg.sigmoid_steepness = a.k;
  cfg.magnitude_epsilon = a.epsilon;
  cfg.weighting_mode = parse_weighting_mode(a.mode);
  cfg.normalize_by_pixel_count = a.normalize;
  const auto pred = io::read_gray(a.pred);
  const auto gt = io::read_gray(a.gt);
  const auto vps = read_vp_sidecar(a.vps);
  const auto report = vp_loss(pred, gt, vps, cfg);

  std::ostringstream text;
  text << "loss " << fmt(report.loss, 10) << " (" << to_string(cfg.weighting_mode) << ")\n";
  for (std::size_t i = 0; i < vps.size(); ++i) {
    text << "vp[" << i << "] pred " << fmt(report.scores_pred[i], 10) << " gt "
         << fmt(report.scores_gt[i], 10) << "\n";
  }
  return {to_json(report), text.str()};
}

// ---- grad-check ----

struct GradArgs {
  int size = 16;
  int trials = 5;
  int vps = 2;
  double h = 1e-4;
  int probes = 50;
  double tol = 1e-3;
};

Outcome cmd_grad_check(const GradArgs& a, std::uint64_t seed) {
  GradCheckOptions o;
  o.size = a.size;
  o.trials = a.trials;
  o.vps_per_trial = a.vps;
  o.step = a.h;
  o.probes = a.probes;
  o.tolerance = a.tol;
  o.seed = seed;
  const auto r = run_grad_check(o);

  Json trials = Json::array();
  std::ostringstream text;
  text << "seed " << seed << "\n";
  for (const auto& t : r.trials) {
    Json vps = Json::array();
    for (const auto& vp : t.vps) vps.push_back(to_json(vp));
    trials.push_back({{"seed", t.seed},
                      {"vps", vps},
                      {"loss", t.loss},
                      {"max_rel_err", t.max_rel_err},
                      {"worst_pixel", t.worst_pixel}});
    text << "trial seed " << t.seed << " loss " << fmt(t.loss) << " max_rel_err "
         << fmt(t.max_rel_err, 3) << "\n";
  }
  text << (r.passed ? "PASS" : "FAIL") << " max_rel_err " << fmt(r.max_rel_err, 3) << " < "
       << fmt(o.tolerance, 3) << "\n";
  Json j = {{"seed", seed},       {"size", o.size},       {"step", o.step},
            {"probes", o.probes}, {"tolerance", o.tolerance}, {"trials", trials},
            {"max_rel_err", r.max_rel_err}, {"passed", r.passed}};
  return {j, text.str(), r.passed ? kExitOk : kExitCheckFailed};
}

// ---- extract-outlines ----

struct OutlineArgs {
  std::string seg, vps, out;
  double dp_eps = 2.0;
  double theta_deg = 5.0;
  int min_pixels = 16;
  int line_width = 3;
};

Outcome cmd_extract_outlines(const OutlineArgs& a) {
  const auto labels = io::read_labels(a.seg);
  const auto vps = read_vp_sidecar(a.vps);
  ContourOptions opts;
  opts.min_component_pixels = a.min_pixels;
  if (a.min_pixels < 1) throw Error(ErrorCode::kInvalidArgument, "--min-pixels must be >= 1");
  std::vector<Polyline> simplified;
  for (const auto& poly : trace_contours(labels, opts)) {
    simplified.push_back(douglas_peucker(poly, a.dp_eps));
  }
  const auto edges = select_vp_aligned_edges(simplified, vps, deg_to_rad(a.theta_deg));

  const fs::path out(a.out);
  fs::create_directories(out);
  const std::string id = fs::path(a.seg).stem().string();
  const fs::path outlines = out / (id + ".outlines.json");
  const fs::path cond = out / (id + ".cond.png");
  write_json_file(outlines, outlines_to_json(edges));
  io::write_file_atomic(cond,
                        io::encode_png(render_condition(edges, labels.width, labels.height,
                                                        a.line_width)));
  Json j = {{"outlines_file", outlines.string()},
            {"cond_file", cond.string()},
            {"polylines", simplified.size()},
            {"edges", edges.size()}};
  return {j, std::to_string(edges.size()) + " edges from " + std::to_string(simplified.size()) +
                 " polylines -> " + outlines.string() + "\n"};
}

// ---- make-mask ----

struct MaskArgs {
  std::string annotation, out;
  std::optional<int> dilate;
};

Outcome cmd_make_mask(const MaskArgs& a) {
  auto rec = annotation_from_json(read_json_file(a.annotation));
  if (a.dilate) {
    rec.dilation_px = *a.dilate;
    validate_annotation(rec);
  }
  const auto result = build_mask(rec.pairs, rec.width, rec.height, rec.dilation_px);
  io::write_file_atomic(a.out, io::encode_png(result.mask));
  Json j = {{"out", a.out},
            {"width", rec.width},
            {"height", rec.height},
            {"dilation_px", rec.dilation_px},
            {"coverage", result.coverage},
            {"degenerate_pairs", result.degenerate_pairs}};
  return {j, "mask " + std::to_string(rec.width) + "x" + std::to_string(rec.height) +
                 " coverage " + fmt(result.coverage) + " -> " + a.out + "\n"};
}

// ---- detect-vps ----

struct DetectArgs {
  std::string image, ransac, out;
};

Outcome cmd_detect_vps(const DetectArgs& a, std::uint64_t seed) {
  const auto cfg = load_ransac(a.ransac, seed);
  const auto candidates = detect_vps_in_image(io::read_gray(a.image), cfg);
  Json j = candidates_to_json(candidates, cfg);
  j["seed"] = seed;
  if (!a.out.empty()) write_json_file(a.out, j);
  std::ostringstream text;
  text << "seed " << seed << "\n";
  for (const auto& c : candidates) {
    text << "vp [" << fmt(c.vp.x()) << ", " << fmt(c.vp.y()) << ", " << fmt(c.vp.w())
         << "] score " << fmt(c.score) << " inliers " << c.inliers.size() << "\n";
  }
  if (candidates.empty()) text << "no vanishing points found\n";
  return {j, text.str()};
}

// ---- eval-aa ----

struct EvalArgs {
  std::string images, annotations, ransac, out, csv;
  std::optional<double> fx, fy, cx, cy;
  std::vector<double> thresholds{3.0, 5.0, 10.0};
  int jobs = 1;
};

struct EvalItem {
  std::string id;
  fs::path image;
  std::vector<HomogeneousPoint> targets;
};

std::vector<EvalItem> collect_eval_items(const EvalArgs& a, std::ostream& err) {
  if (!fs::is_directory(a.images)) {
    throw Error(ErrorCode::kIo, "image directory not found: " + a.images);
  }
  if (!fs::is_directory(a.annotations)) {
    throw Error(ErrorCode::kIo, "annotation directory not found: " + a.annotations);
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.images)) {
    if (e.is_regular_file() && has_image_extension(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<EvalItem> items;
  for (const auto& f : files) {
    const std::string id = f.stem().string();
    const fs::path record = fs::path(a.annotations) / (id + ".annotation.json");
    const fs::path sidecar = fs::path(a.annotations) / (id + ".vps.json");
    EvalItem item{id, f, {}};
    if (fs::exists(record)) {
      item.targets.push_back(annotation_from_json(read_json_file(record)).target_vp);
    } else if (fs::exists(sidecar)) {
      item.targets = read_vp_sidecar(sidecar);
    } else {
      err << "warning: no annotation for " << id << ", skipped\n";
      continue;
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<ImageResult> evaluate_item(const EvalItem& item, const RansacConfig& cfg,
                                       const EvalArgs& a) {
  const auto gray = io::read_gray(item.image);
  CameraIntrinsics k = CameraIntrinsics::default_for(gray.width(), gray.height());
  if (a.fx) k.fx = *a.fx;
  if (a.fy) k.fy = *a.fy;
  if (a.cx) k.cx = *a.cx;
  if (a.cy) k.cy = *a.cy;
  k.validate();
  std::vector<HomogeneousPoint> detected;
  for (const auto& c : detect_vps_in_image(gray, cfg)) detected.push_back(c.vp);

  std::vector<ImageResult> out;
  for (std::size_t i = 0; i < item.targets.size(); ++i) {
    ImageResult r;
    r.image_id = item.targets.size() == 1 ? item.id : item.id + "#" + std::to_string(i);
    r.detector = "ransac";
    r.intrinsics = k;
    r.no_detections = detected.empty();
    r.min_error_deg = r.no_detections ? kNoDetectionErrorDeg
                                      : image_angle_error(detected, item.targets[i], k);
    out.push_back(std::move(r));
  }
  return out;
}

Outcome cmd_eval_aa(const EvalArgs& a, std::uint64_t seed, std::ostream& err) {
  const auto cfg = load_ransac(a.ransac, seed);
  if (a.jobs < 1) throw Error(ErrorCode::kInvalidArgument, "--jobs must be >= 1");
  const auto items = collect_eval_items(a, err);
  if (items.empty()) throw Error(ErrorCode::kEmptyInput, "no annotated images to evaluate");

  // Workers take items round-robin; results are merged in item order.
  std::vector<std::vector<ImageResult>> per_item(items.size());
  const int jobs = std::min<int>(a.jobs, static_cast<int>(items.size()));
  std::vector<std::future<void>> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < items.size(); i += jobs) {
        per_item[i] = evaluate_item(items[i], cfg, a);
      }
    }));
  }
  for (auto& f : workers) f.get();

  std::vector<ImageResult> results;
  for (auto& r : per_item) results.insert(results.end(), r.begin(), r.end());
  const auto report = make_aa_report(std::move(results), a.thresholds, "ransac");
  Json j = to_json(report);
  j["seed"] = seed;
  if (!a.out.empty()) write_json_file(a.out, j);
  if (!a.csv.empty()) io::write_file_atomic(a.csv, aa_report_csv(report));

  std::ostringstream text;
  text << "seed " << seed << "\n" << report.per_image.size() << " targets, mean error "
       << fmt(report.mean_error_deg, 4) << " deg\n";
  for (const auto& [t, v] : report.aa_at) text << "AA@" << fmt(t) << " " << fmt(v, 4) << "\n";
  return {j, text.str()};
}

// ---- simulate-inpaint ----

struct InpaintArgs {
  std::string z0, mask, schedule, out;
  std::string predictor = "mock:zero";
  double omega1 = 7.5;
  double omega2 = 1.0;
  int steps = 10;
  bool skip_zero_weight = false;
};

Outcome cmd_simulate_inpaint(const InpaintArgs& a, std::uint64_t seed) {
  const LatentTensor z0 = read_latent(a.z0);
  if (z0.shape().size() < 2) {
    throw Error(ErrorCode::kShapeMismatch, "latent needs at least two dimensions (H, W)");
  }
  const std::size_t h = z0.shape()[z0.shape().size() - 2];
  const std::size_t w = z0.shape().back();
  const Bitmap bits = io::read_bitmap(a.mask);
  const LatentTensor mask = downsample_mask(bits.cells(), bits.width(), bits.height(), w, h);
  const DiffusionSchedule sched = a.schedule.empty()
                                      ? DiffusionSchedule::scaled_linear(1000)
                                      : schedule_from_json(read_json_file(a.schedule));
  const auto steps = evenly_spaced_steps(sched, a.steps);

  auto inner = make_predictor(a.predictor, sched, z0);
  CountingPredictor counting(*inner);
  const auto policy = a.skip_zero_weight ? CallPolicy::kSkipZeroWeight : CallPolicy::kAllCorners;
  const LatentTensor result =
      run_inpainting(counting, z0, mask, sched, {a.omega1, a.omega2}, steps, seed, policy);
  write_latent(a.out, result);

  double max_abs = 0.0;
  for (std::size_t i = 0; i < result.size(); ++i) {
    max_abs = std::max(max_abs, std::abs(result[i] - z0[i]));
  }
  std::size_t masked = 0;
  for (double m : mask.data()) masked += m != 0.0 ? 1 : 0;
  Json j = {{"out", a.out},
            {"seed", seed},
            {"shape", z0.shape()},
            {"steps", steps},
            {"omega1", a.omega1},
            {"omega2", a.omega2},
            {"predictor", a.predictor},
            {"call_policy", a.skip_zero_weight ? "skip_zero_weight" : "all_corners"},
            {"predictor_calls", counting.calls()},
            {"masked_cells", masked},
            {"max_abs_diff_from_z0", max_abs}};
  std::ostringstream text;
  text << "seed " << seed << "\n" << steps.size() << " steps, " << counting.calls()
       << " predictor calls, max |out - z0| " << fmt(max_abs, 4) << " -> " << a.out << "\n";
  return {j, text.str()};
}

// ---- serve ----

struct ServeArgs {
  std::string listen = "127.0.0.1:8080";
  std::string images, store, ransac;
  int line_width = 3;
};

Outcome cmd_serve(const ServeArgs& a, std::uint64_t seed, std::ostream& out) {
  ServiceOptions opts;
  const auto colon = a.listen.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "--listen must be host:port");
  }
  opts.host = a.listen.substr(0, colon);
  try {
    opts.port = std::stoi(a.listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in --listen " + a.listen);
  }
  opts.store.images_dir = a.images;
  opts.store.store_dir = a.store;
  opts.store.ransac = load_ransac(a.ransac, seed);
  opts.store.condition_line_width = a.line_width;

  // Route SIGTERM/SIGINT to a watcher thread so shutdown goes through stop().
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGINT);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &signals, &previous);

  AnnotationService service(opts);
  const int port = service.bind();
  out << Json{{"listening", opts.host + ":" + std::to_string(port)},
              {"seed", seed},
              {"version", kVersion}}
             .dump()
      << std::endl;

  std::atomic<bool> done{false};
  std::atomic<int> received{0};
  std::thread watcher([&] {
    const timespec poll{0, 100'000'000};
    while (!done) {
      const int sig = sigtimedwait(&signals, nullptr, &poll);
      if (sig > 0) {
        received = sig;
        service.stop();
        return;
      }
    }
  });
  service.serve();
  done = true;
  watcher.join();
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  Json j = {{"stopped", true}, {"signal", received.load()}};
  return {j, "service stopped\n"};
}

int exit_code_for(const Error& e) {
  switch (error_kind(e.code())) {
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kValidation: return kExitValidation;
    case ErrorKind::kInternal: return kExitInternal;
  }
  return kExitInternal;
}

void report_error(const std::exception& e, const Globals& g, std::ostream& out,
                  std::ostream& err) {
  if (g.json) {
    out << error_json(e).dump() << "\n";
  } else {
    err << "error: " << e.what() << "\n";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vanishing-point consistency toolkit", "vpfix"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file mirroring the flags; flags take precedence");
  app.set_version_flag("--version", kVersion);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
  app.add_flag("--json", g.json, "Machine-readable JSON on stdout");

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "VP alignment scores and loss of two images");
  sc->add_option("--pred", score.pred, "Predicted image")->required();
  sc->add_option("--gt", score.gt, "Ground-truth image")->required();
  sc->add_option("--vps", score.vps, "JSON file {vps: [[x, y, w], ...]}")->required();
  sc->add_option("--theta-deg", score.theta_deg, "Sigmoid threshold")->capture_default_str();
  sc->add_option("--k", score.k, "Sigmoid steepness")->capture_default_str();
  sc->add_option("--mode", score.mode, "sigmoid or dot")->capture_default_str();
  sc->add_option("--epsilon", score.epsilon, "Magnitude gate")->capture_default_str();
  sc->add_flag("--normalize", score.normalize, "Divide scores by the pixel count");

  GradArgs grad;
  auto* gc = app.add_subcommand("grad-check", "Finite-difference check of the VP-loss gradient");
  gc->add_option("--size", grad.size, "Image side length")->capture_default_str();
  gc->add_option("--trials", grad.trials, "Random images")->capture_default_str();
  gc->add_option("--vps", grad.vps, "Random VPs per image")->capture_default_str();
  gc->add_option("--step", grad.h, "Central-difference step")->capture_default_str();
  gc->add_option("--probes", grad.probes, "Largest-gradient pixels checked")->capture_default_str();
  gc->add_option("--tol", grad.tol, "Maximum relative error")->capture_default_str();

  OutlineArgs outl;
  auto* eo = app.add_subcommand("extract-outlines", "VP-aligned outline edges from a label map");
  eo->add_option("--seg", outl.seg, "Label PNG (8 or 16 bit)")->required();
  eo->add_option("--vps", outl.vps, "JSON file {vps: [...]}")->required();
  eo->add_option("--dp-eps", outl.dp_eps, "Douglas-Peucker tolerance, px")->capture_default_str();
  eo->add_option("--theta-deg", outl.theta_deg, "Alignment threshold")->capture_default_str();
  eo->add_option("--min-pixels", outl.min_pixels, "Smallest component")->capture_default_str();
  eo->add_option("--line-width", outl.line_width, "Condition stroke")->capture_default_str();
  eo->add_option("--out", outl.out, "Output directory")->required();

  MaskArgs mask;
  auto* mm = app.add_subcommand("make-mask", "Between-outline mask of an annotation record");
  mm->add_option("--annotation", mask.annotation, "Annotation JSON")->required();
  mm->add_option("--out", mask.out, "Output PNG")->required();
  mm->add_option("--dilate", mask.dilate, "Override the record's dilation_px");

  DetectArgs det;
  auto* dv = app.add_subcommand("detect-vps", "RANSAC vanishing points of one image");
  dv->add_option("--image", det.image, "Input image")->required();
  dv->add_option("--ransac", det.ransac, "RANSAC config JSON");
  dv->add_option("--out", det.out, "Also write the candidates JSON here");

  EvalArgs eval;
  auto* ea = app.add_subcommand("eval-aa", "Angle accuracy of detected VPs against targets");
  ea->add_option("--images", eval.images, "Image directory")->required();
  ea->add_option("--annotations", eval.annotations,
                 "Directory of <id>.annotation.json or <id>.vps.json")
      ->required();
  ea->add_option("--fx", eval.fx, "Focal length x (default max(W, H))");
  ea->add_option("--fy", eval.fy, "Focal length y");
  ea->add_option("--cx", eval.cx, "Principal point x (default W / 2)");
  ea->add_option("--cy", eval.cy, "Principal point y");
  ea->add_option("--thresholds", eval.thresholds, "Degrees, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  ea->add_option("--ransac", eval.ransac, "RANSAC config JSON");
  ea->add_option("--out", eval.out, "Write aa_report.json here");
  ea->add_option("--csv", eval.csv, "Write per-image CSV here");
  ea->add_option("--jobs", eval.jobs, "Worker threads")->capture_default_str();

  InpaintArgs inp;
  auto* si = app.add_subcommand("simulate-inpaint", "Masked guided denoising with a mock model");
  si->add_option("--z0", inp.z0, "Original latent file")->required();
  si->add_option("--mask", inp.mask, "Mask PNG, resampled to the latent grid")->required();
  si->add_option("--schedule", inp.schedule, "JSON {T, alpha_bar} (default 1000-step)");
  si->add_option("--omega1", inp.omega1, "Text guidance scale")->capture_default_str();
  si->add_option("--omega2", inp.omega2, "Outline guidance scale")->capture_default_str();
  si->add_option("--steps", inp.steps, "Denoising steps")->capture_default_str();
  si->add_option("--predictor", inp.predictor,
                 "mock:zero | mock:const:<v> | mock:true-eps[:<file>] | pipe:<cmd>")
      ->capture_default_str();
  si->add_flag("--skip-zero-weight", inp.skip_zero_weight,
               "Skip predictor calls whose guidance weight is zero");
  si->add_option("--out", inp.out, "Output latent file")->required();

  ServeArgs serve;
  auto* sv = app.add_subcommand("serve", "Annotation HTTP service");
  sv->add_option("--listen", serve.listen, "host:port")->envname("VPFIX_LISTEN")
      ->capture_default_str();
  sv->add_option("--images", serve.images, "Image directory")->envname("VPFIX_IMAGES")
      ->required();
  sv->add_option("--store", serve.store, "Annotation store directory")->envname("VPFIX_STORE")
      ->required();
  sv->add_option("--ransac", serve.ransac, "RANSAC config JSON")->envname("VPFIX_RANSAC");
  sv->add_option("--line-width", serve.line_width, "Condition stroke")->capture_default_str();

  std::vector<std::string> argv_storage{"vpfix"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::FileError& e) {
    report_error(Error(ErrorCode::kIo, e.what()), g, out, err);
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    report_error(Error(ErrorCode::kInvalidArgument, e.what()), g, out, err);
    return kExitValidation;
  }

  try {
    Outcome result;
    if (*sc) {
      result = cmd_score(score);
    } else if (*gc) {
      result = cmd_grad_check(grad, g.seed);
    } else if (*eo) {
      result = cmd_extract_outlines(outl);
    } else if (*mm) {
      result = cmd_make_mask(mask);
    } else if (*dv) {
      result = cmd_detect_vps(det, g.seed);
    } else if (*ea) {
      result = cmd_eval_aa(eval, g.seed, err);
    } else if (*si) {
      result = cmd_simulate_inpaint(inp, g.seed);
    } else if (*sv) {
      result = cmd_serve(serve, g.seed, out);
    }
    if (g.json) {
      out << result.json.dump(2) << "\n";
    } else {
      out << result.text;
    }
    return result.exit;
  } catch (const Error& e) {
    report_error(e, g, out, err);
    return exit_code_for(e);
  } catch (const Json::exception& e) {
    report_error(Error(ErrorCode::kFormat, e.what()), g, out, err);
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    report_error(Error(ErrorCode::kIo, e.what()), g, out, err);
    return kExitIo;
  } catch (const std::exception& e) {
    report_error(Error(ErrorCode::kInternal, e.what()), g, out, err);
    return kExitInternal;
  }
}

}  // namespace vpfix::tools
