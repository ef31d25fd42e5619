#pragma once

#include <cstdint>
#include <functional>

namespace crosscurve {

/// Number of worker threads: CROSSCURVE_THREADS if set, hardware otherwise.
int worker_threads();

/// Apply f to every index in [0,n). Work items must be independent; callers
/// reduce stored per-index results in index order so reports do not depend
/// on the thread count.
void parallel_for(long n, const std::function<void(long)>& f);

}  // namespace crosscurve
