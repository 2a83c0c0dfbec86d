#pragma once

#include <cstddef>
#include <functional>

namespace hbl {

/// Worker cap: HBL_THREADS env var if set (>=1), else hardware concurrency.
/// Results never depend on this value; it only bounds wall time.
int max_threads();

/// Test hook. Pass 0 to restore env/hardware behaviour.
void set_max_threads_override(int n);

/// Runs fn(begin, end) over disjoint chunks of [0, n). Call sites must write
/// to disjoint slots per index so the chunking cannot affect results.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace hbl
