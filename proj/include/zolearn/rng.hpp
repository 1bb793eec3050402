#pragma once

#include <cstdint>
#include <string_view>

#include "zolearn/common.hpp"

namespace zolearn {

// Counter-based random stream: the n-th draw is a pure function of
// (key, n), so a stream can be re-created exactly from its key and counter.
// Child streams are derived by labeled splits, which keeps every consumer
// (sphere sampling, parameter sampling, multistart) independent of how many
// draws the others make.
class Stream {
 public:
  explicit Stream(std::uint64_t seed);

  Stream split(std::string_view label) const;
  Stream split(std::uint64_t index) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  Vec normal_vector(int dim);
  Vec uniform_vector(int dim, double lo, double hi);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  Stream(std::uint64_t key, bool /*raw*/) : key_(key) {}

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t z);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace zolearn
