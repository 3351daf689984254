#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lada/matrix.hpp"
#include "lada/rng.hpp"

namespace lada {

/// Mini-batches drawn without replacement, one shuffled pass at a time. A
/// new pass snapshots the population it is given, so growth of the
/// population only becomes visible at the next pass.
class PassSampler {
 public:
  struct Draw {
    std::vector<Id> ids;
    bool ends_pass = false;
  };

  Draw next(std::span<const Id> population, std::size_t batch_size, Rng& rng);
  void reset() noexcept {
    order_.clear();
    cursor_ = 0;
  }
  std::size_t passes_completed() const noexcept { return passes_; }

 private:
  std::vector<Id> order_;
  std::size_t cursor_ = 0;
  std::size_t passes_ = 0;
};

}  // namespace lada
