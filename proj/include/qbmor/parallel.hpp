/// \file parallel.hpp
/// \brief Minimal deterministic parallel-for over independent index ranges.
#ifndef QBMOR_PARALLEL_HPP
#define QBMOR_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace qbmor {

/// \brief Number of worker threads: the QBMOR_THREADS environment variable if
///        set to a positive integer, otherwise the hardware concurrency (≥ 1).
int thread_count();

/// \brief Runs body(i) for i in [0, count). Each index is handled by exactly one
///        thread, so writes to disjoint per-index slots are deterministic
///        regardless of scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace qbmor

#endif  // QBMOR_PARALLEL_HPP
