#include "lada/sampler.hpp"

#include <algorithm>

namespace lada {

PassSampler::Draw PassSampler::next(std::span<const Id> population, std::size_t batch_size,
                                    Rng& rng) {
  Draw d;
  if (population.empty() || batch_size == 0) return d;
  if (cursor_ >= order_.size()) {
    order_.assign(population.begin(), population.end());
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng.index(i)]);
    cursor_ = 0;
  }
  const std::size_t end = std::min(order_.size(), cursor_ + batch_size);
  d.ids.assign(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
               order_.begin() + static_cast<std::ptrdiff_t>(end));
  cursor_ = end;
  d.ends_pass = cursor_ == order_.size();
  if (d.ends_pass) ++passes_;
  return d;
}

}  // namespace lada
