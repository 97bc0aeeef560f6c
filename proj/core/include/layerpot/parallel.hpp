#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace layerpot {

/// Worker count: LAYERPOT_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n). Iterations are split into contiguous chunks, one per
/// worker; body must only write to state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise (binary tree) summation; the tree depends only on values.size().
double pairwise_sum(std::span<const double> values);

}  // namespace layerpot
