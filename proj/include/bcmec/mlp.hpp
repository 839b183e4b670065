#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bcmec/rng.hpp"

namespace bcmec {

// Post-activation values per layer; act[0] is the input. A cache is only
// valid for a backward call against the net and input that produced it.
struct ForwardCache {
  std::vector<std::vector<double>> act;
};

// Fully connected net with rectified-linear hidden layers and a linear output
// layer. Parameters live in one flat vector (per layer: weights row-major,
// then biases) so the optimizer and the target-network updates can treat a
// network as a plain array.
class Mlp {
 public:
  explicit Mlp(std::vector<int> dims);
  static Mlp glorot(std::vector<int> dims, Rng& rng);

  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> forward(std::span<const double> x, ForwardCache& cache) const;

  // Exact reverse-mode gradients of the forward map. Parameter gradients are
  // accumulated into `grad` (same layout as params); returns d(upstream.y)/dx.
  std::vector<double> backward(const ForwardCache& cache, std::span<const double> upstream,
                               std::vector<double>& grad) const;

  // Input gradient only, skipping the parameter-gradient accumulation.
  std::vector<double> backward_input(const ForwardCache& cache,
                                     std::span<const double> upstream) const;

 private:
  std::vector<int> dims_;
  std::vector<double> params_;
  std::vector<std::size_t> w_off_, b_off_;  // per-layer offsets into params_
};

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
};

// Standard Adam with bias correction.
void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// target <- zeta * behavior + (1 - zeta) * target, elementwise.
void soft_update(const std::vector<double>& behavior, std::vector<double>& target, double zeta);

bool all_finite(const std::vector<double>& v);

}  // namespace bcmec
