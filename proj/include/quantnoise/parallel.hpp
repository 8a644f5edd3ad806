#pragma once

#include <functional>

namespace quantnoise {

// Runs fn(begin, end) over [0, count) split into contiguous chunks on up to
// `jobs` threads. Chunking is positional, so callers must write results to
// disjoint, preallocated slots; output is then identical for any job count.
void parallel_chunks(int count, int jobs, const std::function<void(int, int)>& fn);

}  // namespace quantnoise
