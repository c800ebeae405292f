#ifndef PLAPKAM_PARALLEL_HPP
#define PLAPKAM_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace plapkam {

/// Worker cap: PLAPKAM_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads.  Each index
/// runs exactly once; callers write results into slot i, so the merged output
/// does not depend on scheduling.  The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace plapkam

#endif
