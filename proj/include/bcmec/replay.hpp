#pragma once

#include <cstddef>
#include <vector>

#include "bcmec/errors.hpp"
#include "bcmec/rng.hpp"

namespace bcmec {

// One transition of the joint system.
struct Experience {
  std::vector<double> obs;       // concatenated per-agent observations
  std::vector<double> act;       // concatenated continuous action vectors
  std::vector<double> reward;    // per agent
  std::vector<double> next_obs;
};

// Fixed-capacity ring; sampling is uniform with replacement from a seeded
// source.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ContractError("replay capacity must be positive");
  }

  void push(Experience e) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(e));
    } else {
      data_[cursor_] = std::move(e);
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Experience& operator[](std::size_t i) const { return data_[i]; }

  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
    if (data_.empty()) throw ContractError("cannot sample from an empty replay buffer");
    std::vector<std::size_t> idx(batch);
    for (std::size_t i = 0; i < batch; ++i) idx[i] = uniform_below(rng, data_.size());
    return idx;
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Experience> data_;
};

}  // namespace bcmec
