#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "vpfix/guidance.hpp"

namespace vpfix::tools {

/// Builds a predictor from its spec string:
///   mock:zero              all-zero noise
///   mock:const:<v>         every element equals v
///   mock:true-eps[:<file>] the exact noise that maps z_t back to the clean latent in
///                          <file> (default: `clean`)
///   pipe:<cmd>             runs `<cmd> <in.latent> <out.latent> <t> <text_on> <cond_on>`
/// Throws InvalidArgument on an unknown spec.
std::unique_ptr<NoisePredictor> make_predictor(const std::string& spec,
                                               const DiffusionSchedule& sched,
                                               const LatentTensor& clean);

/// Forwards to another predictor and counts calls.
class CountingPredictor : public NoisePredictor {
 public:
  explicit CountingPredictor(NoisePredictor& inner) : inner_(inner) {}
  LatentTensor predict(const LatentTensor& z_t, int t, bool text_on, bool cond_on) override {
    ++calls_;
    return inner_.predict(z_t, t, text_on, cond_on);
  }
  std::size_t calls() const { return calls_; }

 private:
  NoisePredictor& inner_;
  std::size_t calls_ = 0;
};

}  // namespace vpfix::tools
