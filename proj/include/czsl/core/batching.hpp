#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "czsl/core/random.hpp"

namespace czsl {

// Shuffles [0, n) and cuts it into consecutive batches; the last one may be short.
inline std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t n, std::size_t batch_size,
                                                              Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

template <typename Seq>
Seq gather(const Seq& src, const std::vector<std::size_t>& idx) {
  Seq out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(src[i]);
  return out;
}

}  // namespace czsl
