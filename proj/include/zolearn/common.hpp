#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zolearn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown for violated preconditions and malformed inputs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a numerical routine hits a state it cannot continue from
// (overflow, non-finite oracle output, iteration budget exhausted).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Splits a stacked profile vector into per-player blocks.
class BlockLayout {
 public:
  BlockLayout() = default;
  explicit BlockLayout(std::vector<int> dims);

  int players() const { return static_cast<int>(dims_.size()); }
  int dim(int player) const { return dims_[player]; }
  int offset(int player) const { return offsets_[player]; }
  int total() const { return total_; }
  const std::vector<int>& dims() const { return dims_; }

  auto block(Vec& x, int player) const {
    return x.segment(offsets_[player], dims_[player]);
  }
  auto block(const Vec& x, int player) const {
    return x.segment(offsets_[player], dims_[player]);
  }

  bool operator==(const BlockLayout&) const = default;

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int total_ = 0;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace zolearn
