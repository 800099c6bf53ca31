#include "vpfix/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "detail/rng.hpp"
#include "detail/summation.hpp"
#include "vpfix/error.hpp"

namespace vpfix {
namespace {

void require_same_shape(const LatentTensor& a, const LatentTensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": tensor shapes differ");
  }
}

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

// out = a * x + b * y, elementwise.
LatentTensor affine(double a, const LatentTensor& x, double b, const LatentTensor& y) {
  LatentTensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

// (1 - w) * lo + w * hi, returning an operand unchanged at w = 0 or 1.
LatentTensor blend(const LatentTensor& lo, const LatentTensor& hi, double w) {
  require_same_shape(lo, hi, "guidance blend");
  if (w == 1.0) return hi;
  if (w == 0.0) return lo;
  return affine(1.0 - w, lo, w, hi);
}

LatentTensor checked_call(NoisePredictor& p, const LatentTensor& z, int t, bool text, bool cond) {
  LatentTensor out = p.predict(z, t, text, cond);
  if (out.shape() != z.shape()) {
    throw Error(ErrorCode::kPredictorShapeMismatch,
                "noise predictor returned a tensor of a different shape");
  }
  return out;
}

// Maps each element of `z_shape` to its element of a right-aligned broadcast mask.
std::vector<std::size_t> broadcast_index(const std::vector<std::size_t>& z_shape,
                                         const std::vector<std::size_t>& m_shape) {
  if (m_shape.size() > z_shape.size()) {
    throw Error(ErrorCode::kShapeMismatch, "mask has more dimensions than the latent");
  }
  const std::size_t offset = z_shape.size() - m_shape.size();
  for (std::size_t i = 0; i < m_shape.size(); ++i) {
    if (m_shape[i] != 1 && m_shape[i] != z_shape[offset + i]) {
      throw Error(ErrorCode::kShapeMismatch, "mask is not broadcastable to the latent shape");
    }
  }
  // Mask strides (0 on broadcast axes), aligned with z's axes.
  std::vector<std::size_t> strides(z_shape.size(), 0);
  std::size_t s = 1;
  for (std::size_t i = m_shape.size(); i-- > 0;) {
    strides[offset + i] = m_shape[i] == 1 ? 0 : s;
    s *= m_shape[i];
  }
  const std::size_t n = shape_product(z_shape);
  std::vector<std::size_t> index(n, 0);
  std::vector<std::size_t> coord(z_shape.size(), 0);
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t m = 0;
    for (std::size_t d = 0; d < z_shape.size(); ++d) m += coord[d] * strides[d];
    index[flat] = m;
    for (std::size_t d = z_shape.size(); d-- > 0;) {
      if (++coord[d] < z_shape[d]) break;
      coord[d] = 0;
    }
  }
  return index;
}

void require_binary(const LatentTensor& mask) {
  for (double v : mask.data()) {
    if (v != 0.0 && v != 1.0) throw Error(ErrorCode::kMaskNotBinary, "mask entries must be 0 or 1");
  }
}

// inside-mask elements from `in`, the rest from `out`, copied without arithmetic.
LatentTensor select(const LatentTensor& mask, const LatentTensor& in, const LatentTensor& out) {
  const auto index = broadcast_index(in.shape(), mask.shape());
  LatentTensor r(in.shape());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = mask[index[i]] == 1.0 ? in[i] : out[i];
  return r;
}

}  // namespace

DiffusionSchedule::DiffusionSchedule(std::vector<double> alpha_bar)
    : alpha_bar_(std::move(alpha_bar)) {
  if (alpha_bar_.empty()) throw Error(ErrorCode::kInvalidSchedule, "schedule has no timesteps");
  for (std::size_t i = 0; i < alpha_bar_.size(); ++i) {
    const double a = alpha_bar_[i];
    if (!(a > 0.0 && a <= 1.0)) {
      throw Error(ErrorCode::kInvalidSchedule,
                  "alpha_bar[" + std::to_string(i + 1) + "] must lie in (0, 1]");
    }
    if (i > 0 && !(a < alpha_bar_[i - 1])) {
      throw Error(ErrorCode::kInvalidSchedule, "alpha_bar must be strictly decreasing");
    }
  }
}

DiffusionSchedule DiffusionSchedule::from_betas(std::span<const double> betas) {
  std::vector<double> ab;
  double prod = 1.0;
  for (double b : betas) {
    if (!(b > 0.0 && b < 1.0)) throw Error(ErrorCode::kInvalidSchedule, "betas must lie in (0, 1)");
    prod *= 1.0 - b;
    ab.push_back(prod);
  }
  return DiffusionSchedule(std::move(ab));
}

DiffusionSchedule DiffusionSchedule::scaled_linear(int steps) {
  if (steps < 1) throw Error(ErrorCode::kInvalidSchedule, "schedule needs >= 1 step");
  const double lo = std::sqrt(0.00085);
  const double hi = std::sqrt(0.012);
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double f = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    const double s = lo + f * (hi - lo);
    betas[static_cast<std::size_t>(i)] = s * s;
  }
  return from_betas(betas);
}

double DiffusionSchedule::alpha_bar(int t) const {
  if (t < 0 || t > timesteps()) {
    throw Error(ErrorCode::kTimestepOutOfRange,
                "timestep " + std::to_string(t) + " outside [0, " + std::to_string(timesteps()) +
                    "]");
  }
  return t == 0 ? 1.0 : alpha_bar_[static_cast<std::size_t>(t - 1)];
}

LatentTensor::LatentTensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {}

LatentTensor::LatentTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_product(shape_)) {
    throw Error(ErrorCode::kShapeMismatch, "tensor data length does not match its shape");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "tensor has non-finite data");
  }
}

LatentTensor add_noise(const LatentTensor& z0, const LatentTensor& eps,
                       const DiffusionSchedule& sched, int t) {
  require_same_shape(z0, eps, "add_noise");
  const double ab = sched.alpha_bar(t);
  if (ab == 1.0) return z0;
  return affine(std::sqrt(ab), z0, std::sqrt(1.0 - ab), eps);
}

LatentTensor predict_x0(const LatentTensor& z_t, const LatentTensor& eps_hat,
                        const DiffusionSchedule& sched, int t) {
  require_same_shape(z_t, eps_hat, "predict_x0");
  const double ab = sched.alpha_bar(t);
  if (ab == 1.0) return z_t;
  const double s = std::sqrt(1.0 - ab);
  const double inv = 1.0 / std::sqrt(ab);
  LatentTensor out(z_t.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (z_t[i] - s * eps_hat[i]) * inv;
  return out;
}

LatentTensor cfg_text(const LatentTensor& eps_uc, const LatentTensor& eps_c, double omega1) {
  return blend(eps_uc, eps_c, omega1);
}

LatentTensor cfg_dual(NoisePredictor& predictor, const LatentTensor& z_t, int t,
                      const GuidanceWeights& weights, CallPolicy policy) {
  const bool skip = policy == CallPolicy::kSkipZeroWeight;
  const bool need_uncond_image = !(skip && weights.omega2 == 1.0);
  const bool need_uncond_text = !(skip && weights.omega1 == 1.0);

  auto image_guided = [&](bool text_on) {
    const LatentTensor with_cond = checked_call(predictor, z_t, t, text_on, true);
    if (!need_uncond_image) return with_cond;
    const LatentTensor without = checked_call(predictor, z_t, t, text_on, false);
    return blend(without, with_cond, weights.omega2);
  };
  // Evaluation order: (no text, no cond), (no text, cond), (text, no cond), (text, cond).
  if (!need_uncond_text) return image_guided(true);
  const LatentTensor eps_uc = image_guided(false);
  const LatentTensor eps_c = image_guided(true);
  return cfg_text(eps_uc, eps_c, weights.omega1);
}

LatentTensor two_step_x0(NoisePredictor& predictor, const LatentTensor& z_t, int t,
                         const DiffusionSchedule& sched, const GuidanceWeights& weights,
                         CallPolicy policy) {
  if (t < 2 || t > sched.timesteps()) {
    throw Error(ErrorCode::kTimestepOutOfRange, "two-step estimate needs 2 <= t <= T");
  }
  const LatentTensor eps1 = cfg_dual(predictor, z_t, t, weights, policy);
  const LatentTensor x0 = predict_x0(z_t, eps1, sched, t);
  const int t_mid = t / 2;
  const LatentTensor z_mid = add_noise(x0, eps1, sched, t_mid);
  const LatentTensor eps2 = cfg_dual(predictor, z_mid, t_mid, weights, policy);
  return predict_x0(z_mid, eps2, sched, t_mid);
}

LatentTensor inpaint_step(NoisePredictor& predictor, const LatentTensor& z_t, int t, int t_prev,
                          const DiffusionSchedule& sched, const GuidanceWeights& weights,
                          const LatentTensor& mask, const LatentTensor& z0_orig,
                          const LatentTensor& fresh_eps, CallPolicy policy) {
  if (t < 1 || t > sched.timesteps() || t_prev < 0 || t_prev >= t) {
    throw Error(ErrorCode::kTimestepOutOfRange, "inpaint step needs 0 <= t_prev < t <= T");
  }
  require_same_shape(z_t, z0_orig, "inpaint_step");
  require_same_shape(z_t, fresh_eps, "inpaint_step");
  require_binary(mask);
  const LatentTensor eps_hat = cfg_dual(predictor, z_t, t, weights, policy);
  const LatentTensor x0_hat = predict_x0(z_t, eps_hat, sched, t);
  const LatentTensor z_pred = add_noise(x0_hat, eps_hat, sched, t_prev);
  const LatentTensor z_ideal = add_noise(z0_orig, fresh_eps, sched, t_prev);
  return select(mask, z_pred, z_ideal);
}

LatentTensor inpaint_step(NoisePredictor& predictor, const LatentTensor& z_t, int t,
                          const DiffusionSchedule& sched, const GuidanceWeights& weights,
                          const LatentTensor& mask, const LatentTensor& z0_orig,
                          const LatentTensor& fresh_eps, CallPolicy policy) {
  return inpaint_step(predictor, z_t, t, t - 1, sched, weights, mask, z0_orig, fresh_eps, policy);
}

double controlnet_mse(const LatentTensor& eps, const LatentTensor& eps_hat) {
  require_same_shape(eps, eps_hat, "controlnet_mse");
  if (eps.size() == 0) throw Error(ErrorCode::kEmptyInput, "controlnet_mse of empty tensors");
  std::vector<double> sq(eps.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (eps[i] - eps_hat[i]) * (eps[i] - eps_hat[i]);
  return detail::pairwise_sum(sq) / static_cast<double>(sq.size());
}

LatentTensor run_inpainting(NoisePredictor& predictor, const LatentTensor& z0_orig,
                            const LatentTensor& mask, const DiffusionSchedule& sched,
                            const GuidanceWeights& weights, const std::vector<int>& steps,
                            std::uint64_t rng_seed, CallPolicy policy) {
  if (steps.empty() || steps.back() != 1) {
    throw Error(ErrorCode::kTimestepOutOfRange, "inpainting steps must end at timestep 1");
  }
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (!(steps[i] < steps[i - 1])) {
      throw Error(ErrorCode::kTimestepOutOfRange, "inpainting steps must strictly decrease");
    }
  }
  if (steps.front() > sched.timesteps()) {
    throw Error(ErrorCode::kTimestepOutOfRange, "first inpainting step exceeds the schedule");
  }
  require_binary(mask);
  broadcast_index(z0_orig.shape(), mask.shape());

  LatentTensor z = add_noise(z0_orig, gaussian_like(z0_orig.shape(), detail::derive_seed(rng_seed, 0)),
                             sched, steps.front());
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    const LatentTensor fresh = gaussian_like(z0_orig.shape(), detail::derive_seed(rng_seed, i + 1));
    z = inpaint_step(predictor, z, steps[i], steps[i + 1], sched, weights, mask, z0_orig, fresh,
                     policy);
  }
  const LatentTensor eps_hat = cfg_dual(predictor, z, 1, weights, policy);
  return select(mask, predict_x0(z, eps_hat, sched, 1), z0_orig);
}

std::vector<int> evenly_spaced_steps(const DiffusionSchedule& sched, int count) {
  const int total = sched.timesteps();
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "step count must be >= 1");
  if (count == 1) return {1};
  std::vector<int> steps;
  for (int i = 0; i < count; ++i) {
    const double t = total - static_cast<double>(i) * (total - 1) / (count - 1);
    const int ti = static_cast<int>(std::lround(t));
    if (steps.empty() || ti < steps.back()) steps.push_back(ti);
  }
  if (steps.back() != 1) steps.push_back(1);
  return steps;
}

LatentTensor gaussian_like(const std::vector<std::size_t>& shape, std::uint64_t seed) {
  detail::SplitMix64 rng(seed);
  LatentTensor out(shape);
  for (double& v : out.data()) v = rng.gaussian();
  return out;
}

LatentTensor downsample_mask(std::span<const std::uint8_t> cells, int width, int height,
                             std::size_t out_width, std::size_t out_height) {
  if (width <= 0 || height <= 0 ||
      cells.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kShapeMismatch, "mask raster size mismatch");
  }
  LatentTensor out({out_height, out_width});
  for (std::size_t y = 0; y < out_height; ++y) {
    const auto sy = static_cast<std::size_t>((static_cast<double>(y) + 0.5) * height / out_height);
    for (std::size_t x = 0; x < out_width; ++x) {
      const auto sx = static_cast<std::size_t>((static_cast<double>(x) + 0.5) * width / out_width);
      out[y * out_width + x] = cells[sy * static_cast<std::size_t>(width) + sx] ? 1.0 : 0.0;
    }
  }
  return out;
}

}  // namespace vpfix
