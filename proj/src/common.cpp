#include "zolearn/common.hpp"

namespace zolearn {

BlockLayout::BlockLayout(std::vector<int> dims) : dims_(std::move(dims)) {
  offsets_.reserve(dims_.size());
  for (int d : dims_) {
    require(d > 0, "player dimension must be positive");
    offsets_.push_back(total_);
    total_ += d;
  }
}

}  // namespace zolearn
