#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace vpfix {

/// Cumulative products of the variance schedule, indexed by timestep 0..T.
class DiffusionSchedule {
 public:
  /// `alpha_bar[i]` is the value at timestep i + 1. Must be strictly decreasing in (0, 1);
  /// timestep 0 is the identity (1.0). Throws InvalidSchedule otherwise.
  explicit DiffusionSchedule(std::vector<double> alpha_bar);

  /// Cumulative product of (1 - beta_t). Throws InvalidSchedule unless every beta is in (0, 1).
  static DiffusionSchedule from_betas(std::span<const double> betas);

  /// Betas linear in sqrt-space from 0.00085 to 0.012 over `steps` timesteps.
  static DiffusionSchedule scaled_linear(int steps = 1000);

  int timesteps() const { return static_cast<int>(alpha_bar_.size()); }
  /// Throws TimestepOutOfRange outside [0, T].
  double alpha_bar(int t) const;
  std::span<const double> values() const { return alpha_bar_; }

 private:
  std::vector<double> alpha_bar_;
};

/// Dense real tensor, row-major.
class LatentTensor {
 public:
  LatentTensor() = default;
  LatentTensor(std::vector<std::size_t> shape, double fill = 0.0);
  /// Throws ShapeMismatch when data length differs from the shape product, and
  /// InvalidArgument on non-finite entries.
  LatentTensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  friend bool operator==(const LatentTensor&, const LatentTensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// omega1 scales text guidance, omega2 image (outline) guidance; (1, 1) disables guidance.
struct GuidanceWeights {
  double omega1 = 1.0;
  double omega2 = 1.0;
};

/// Noise-prediction model with its text and outline conditions switched on or off.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual LatentTensor predict(const LatentTensor& z_t, int t, bool text_on, bool cond_on) = 0;
};

/// Adapts a callable to NoisePredictor.
class FunctionPredictor : public NoisePredictor {
 public:
  using Fn = std::function<LatentTensor(const LatentTensor&, int, bool, bool)>;
  explicit FunctionPredictor(Fn fn) : fn_(std::move(fn)) {}
  LatentTensor predict(const LatentTensor& z_t, int t, bool text_on, bool cond_on) override {
    return fn_(z_t, t, text_on, cond_on);
  }

 private:
  Fn fn_;
};

/// Which predictor evaluations cfg_dual performs.
enum class CallPolicy {
  /// Always evaluate all four condition corners.
  kAllCorners,
  /// Skip corners whose blend weight is exactly zero (two calls when omega2 == 1).
  kSkipZeroWeight,
};

/// Forward noising: sqrt(ab) z0 + sqrt(1 - ab) eps with ab = alpha_bar(t).
LatentTensor add_noise(const LatentTensor& z0, const LatentTensor& eps,
                       const DiffusionSchedule& sched, int t);

/// Inverse of add_noise given a noise estimate: (z_t - sqrt(1 - ab) eps_hat) / sqrt(ab).
LatentTensor predict_x0(const LatentTensor& z_t, const LatentTensor& eps_hat,
                        const DiffusionSchedule& sched, int t);

/// (1 - omega1) eps_uc + omega1 eps_c; exact passthrough at omega1 = 0 and 1.
LatentTensor cfg_text(const LatentTensor& eps_uc, const LatentTensor& eps_c, double omega1);

/// Image guidance on both text branches, then text guidance on the result.
LatentTensor cfg_dual(NoisePredictor& predictor, const LatentTensor& z_t, int t,
                      const GuidanceWeights& weights,
                      CallPolicy policy = CallPolicy::kAllCorners);

/// Two-round clean-latent estimate: predict x0 at t, re-noise it to floor(t / 2) with the
/// first noise estimate, predict again. Requires t >= 2.
LatentTensor two_step_x0(NoisePredictor& predictor, const LatentTensor& z_t, int t,
                         const DiffusionSchedule& sched, const GuidanceWeights& weights,
                         CallPolicy policy = CallPolicy::kAllCorners);

/// One masked denoising step from t to t_prev (< t). Inside the mask: deterministic
/// DDIM update from the guided prediction. Outside: the original latent noised to
/// t_prev with `fresh_eps`. `mask` broadcasts over leading dimensions.
LatentTensor inpaint_step(NoisePredictor& predictor, const LatentTensor& z_t, int t, int t_prev,
                          const DiffusionSchedule& sched, const GuidanceWeights& weights,
                          const LatentTensor& mask, const LatentTensor& z0_orig,
                          const LatentTensor& fresh_eps,
                          CallPolicy policy = CallPolicy::kAllCorners);

/// inpaint_step with t_prev = t - 1.
LatentTensor inpaint_step(NoisePredictor& predictor, const LatentTensor& z_t, int t,
                          const DiffusionSchedule& sched, const GuidanceWeights& weights,
                          const LatentTensor& mask, const LatentTensor& z0_orig,
                          const LatentTensor& fresh_eps,
                          CallPolicy policy = CallPolicy::kAllCorners);

/// Mean squared difference.
double controlnet_mse(const LatentTensor& eps, const LatentTensor& eps_hat);

/// Full masked inpainting over `steps` (strictly decreasing, ending at 1). Starts from
/// the original latent noised to steps[0] with seeded Gaussian noise. Outside the mask
/// the result equals `z0_orig` bit for bit.
LatentTensor run_inpainting(NoisePredictor& predictor, const LatentTensor& z0_orig,
                            const LatentTensor& mask, const DiffusionSchedule& sched,
                            const GuidanceWeights& weights, const std::vector<int>& steps,
                            std::uint64_t rng_seed, CallPolicy policy = CallPolicy::kAllCorners);

/// `count` timesteps evenly spaced from T down to 1.
std::vector<int> evenly_spaced_steps(const DiffusionSchedule& sched, int count);

/// Seeded standard-normal tensor (platform-independent stream).
LatentTensor gaussian_like(const std::vector<std::size_t>& shape, std::uint64_t seed);

/// Nearest-neighbor resample of a binary raster (row-major, width x height) to (w, h).
LatentTensor downsample_mask(std::span<const std::uint8_t> cells, int width, int height,
                             std::size_t out_width, std::size_t out_height);

}  // namespace vpfix
