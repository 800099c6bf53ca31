#include "vpfix/tools/predictors.hpp"

#include <unistd.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "vpfix/error.hpp"
#include "vpfix/serialization.hpp"

namespace vpfix::tools {
namespace fs = std::filesystem;

namespace {

class ConstPredictor : public NoisePredictor {
 public:
  explicit ConstPredictor(double v) : value_(v) {}
  LatentTensor predict(const LatentTensor& z_t, int, bool, bool) override {
    return LatentTensor(z_t.shape(), value_);
  }

 private:
  double value_;
};

// eps = (z_t - sqrt(ab) z0) / sqrt(1 - ab), so predict_x0 recovers z0 up to rounding.
class TrueEpsPredictor : public NoisePredictor {
 public:
  TrueEpsPredictor(const DiffusionSchedule& sched, LatentTensor clean)
      : sched_(sched), clean_(std::move(clean)) {}
  LatentTensor predict(const LatentTensor& z_t, int t, bool, bool) override {
    if (z_t.shape() != clean_.shape()) {
      throw Error(ErrorCode::kShapeMismatch, "true-eps clean latent has a different shape");
    }
    const double ab = sched_.alpha_bar(t);
    const double sa = std::sqrt(ab);
    const double sb = std::sqrt(1.0 - ab);
    LatentTensor out(z_t.shape());
    if (sb == 0.0) return out;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (z_t[i] - sa * clean_[i]) / sb;
    return out;
  }

 private:
  const DiffusionSchedule& sched_;
  LatentTensor clean_;
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

class PipePredictor : public NoisePredictor {
 public:
  explicit PipePredictor(std::string cmd) : cmd_(std::move(cmd)) {
    static std::atomic<int> instance{0};
    dir_ = fs::temp_directory_path() /
           ("vpfix-pipe-" + std::to_string(::getpid()) + "-" + std::to_string(instance++));
    fs::create_directories(dir_);
  }
  ~PipePredictor() override {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  LatentTensor predict(const LatentTensor& z_t, int t, bool text_on, bool cond_on) override {
    const fs::path in = dir_ / "in.latent";
    const fs::path out = dir_ / "out.latent";
    fs::remove(out);
    write_latent(in, z_t);
    const std::string command = cmd_ + " " + shell_quote(in.string()) + " " +
                                shell_quote(out.string()) + " " + std::to_string(t) + " " +
                                (text_on ? "1" : "0") + " " + (cond_on ? "1" : "0");
    const int status = std::system(command.c_str());
    if (status != 0) {
      throw Error(ErrorCode::kIo, "predictor command failed with status " + std::to_string(status));
    }
    return read_latent(out);
  }

 private:
  std::string cmd_;
  fs::path dir_;
};

}  // namespace

std::unique_ptr<NoisePredictor> make_predictor(const std::string& spec,
                                               const DiffusionSchedule& sched,
                                               const LatentTensor& clean) {
  if (spec == "mock:zero") return std::make_unique<ConstPredictor>(0.0);
  if (spec.rfind("mock:const:", 0) == 0) {
    const std::string v = spec.substr(11);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(value)) {
      throw Error(ErrorCode::kInvalidArgument, "bad constant in predictor spec: " + spec);
    }
    return std::make_unique<ConstPredictor>(value);
  }
  if (spec == "mock:true-eps") return std::make_unique<TrueEpsPredictor>(sched, clean);
  if (spec.rfind("mock:true-eps:", 0) == 0) {
    return std::make_unique<TrueEpsPredictor>(sched, read_latent(spec.substr(14)));
  }
  if (spec.rfind("pipe:", 0) == 0 && spec.size() > 5) {
    return std::make_unique<PipePredictor>(spec.substr(5));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown predictor spec: " + spec);
}

}  // namespace vpfix::tools
