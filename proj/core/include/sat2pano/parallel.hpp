#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace sat2pano {

/// Runs fn(row) for every row in [0, rows), partitioning contiguous row
/// blocks across hardware threads. Each row must be computed independently
/// so the result never depends on the partition.
inline void parallel_for_rows(int rows, const std::function<void(int)>& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = std::min<int>(static_cast<int>(hw), rows);
  if (workers <= 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const int block = (rows + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * block;
    const int end = std::min(rows, begin + block);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (int r = begin; r < end; ++r) fn(r);
    });
  }
}

}  // namespace sat2pano
