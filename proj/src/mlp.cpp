#include "bcmec/mlp.hpp"

#include <cmath>

#include "bcmec/errors.hpp"

namespace bcmec {

Mlp::Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw ContractError("an Mlp needs at least input and output dims");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    w_off_.push_back(total);
    total += static_cast<std::size_t>(dims_[l + 1]) * dims_[l];
    b_off_.push_back(total);
    total += dims_[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::glorot(std::vector<int> dims, Rng& rng) {
  Mlp net(std::move(dims));
  for (std::size_t l = 0; l + 1 < net.dims_.size(); ++l) {
    const int fan_in = net.dims_[l], fan_out = net.dims_[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    double* w = net.params_.data() + net.w_off_[l];
    for (int i = 0; i < fan_out * fan_in; ++i) w[i] = uniform_in(rng, -limit, limit);
    // biases stay zero
  }
  return net;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  ForwardCache cache;
  return forward(x, cache);
}

std::vector<double> Mlp::forward(std::span<const double> x, ForwardCache& cache) const {
  if (static_cast<int>(x.size()) != input_dim())
    throw ContractError("forward: input length does not match input dim");
  const std::size_t layers = dims_.size() - 1;
  cache.act.assign(layers + 1, {});
  cache.act[0].assign(x.begin(), x.end());

  for (std::size_t l = 0; l < layers; ++l) {
    const int in = dims_[l], out = dims_[l + 1];
    const double* w = params_.data() + w_off_[l];
    const double* b = params_.data() + b_off_[l];
    const std::vector<double>& prev = cache.act[l];
    std::vector<double>& next = cache.act[l + 1];
    next.resize(out);
    const bool hidden = l + 1 < layers;
    for (int i = 0; i < out; ++i) {
      const double* row = w + static_cast<std::size_t>(i) * in;
      double s = b[i];
      for (int j = 0; j < in; ++j) s += row[j] * prev[j];
      next[i] = hidden ? (s > 0 ? s : 0.0) : s;
    }
  }
  return cache.act.back();
}

std::vector<double> Mlp::backward(const ForwardCache& cache, std::span<const double> upstream,
                                  std::vector<double>& grad) const {
  const std::size_t layers = dims_.size() - 1;
  if (cache.act.size() != layers + 1 ||
      static_cast<int>(cache.act[0].size()) != input_dim())
    throw ContractError("backward: cache does not match this net");
  if (static_cast<int>(upstream.size()) != output_dim())
    throw ContractError("backward: upstream length does not match output dim");
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);

  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t l = layers; l-- > 0;) {
    const int in = dims_[l], out = dims_[l + 1];
    const double* w = params_.data() + w_off_[l];
    double* gw = grad.data() + w_off_[l];
    double* gb = grad.data() + b_off_[l];
    const std::vector<double>& prev = cache.act[l];

    std::vector<double> prev_delta(in, 0.0);
    for (int i = 0; i < out; ++i) {
      const double d = delta[i];
      gb[i] += d;
      const double* row = w + static_cast<std::size_t>(i) * in;
      double* grow = gw + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < in; ++j) {
        grow[j] += d * prev[j];
        prev_delta[j] += d * row[j];
      }
    }
    if (l > 0) {
      // ReLU mask of the previous hidden layer (post == 0 means blocked).
      for (int j = 0; j < in; ++j)
        if (prev[j] <= 0) prev_delta[j] = 0.0;
    }
    delta = std::move(prev_delta);
  }
  return delta;
}

std::vector<double> Mlp::backward_input(const ForwardCache& cache,
                                        std::span<const double> upstream) const {
  const std::size_t layers = dims_.size() - 1;
  if (cache.act.size() != layers + 1)
    throw ContractError("backward_input: cache does not match this net");
  if (static_cast<int>(upstream.size()) != output_dim())
    throw ContractError("backward_input: upstream length does not match output dim");

  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t l = layers; l-- > 0;) {
    const int in = dims_[l], out = dims_[l + 1];
    const double* w = params_.data() + w_off_[l];
    const std::vector<double>& prev = cache.act[l];
    std::vector<double> prev_delta(in, 0.0);
    for (int i = 0; i < out; ++i) {
      const double d = delta[i];
      const double* row = w + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < in; ++j) prev_delta[j] += d * row[j];
    }
    if (l > 0) {
      for (int j = 0; j < in; ++j)
        if (prev[j] <= 0) prev_delta[j] = 0.0;
    }
    delta = std::move(prev_delta);
  }
  return delta;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (grad.size() != params.size()) throw ContractError("adam_step: shape mismatch");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.t = 0;
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void soft_update(const std::vector<double>& behavior, std::vector<double>& target, double zeta) {
  if (behavior.size() != target.size()) throw ContractError("soft_update: shape mismatch");
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = zeta * behavior[i] + (1.0 - zeta) * target[i];
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace bcmec
