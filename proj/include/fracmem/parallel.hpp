#pragma once

#include <functional>

namespace fracmem {

/// Worker cap derived from FRACMEM_THREADS: unset or 0 means auto
/// (hardware concurrency), k > 0 caps at k.
int max_threads();

/// Runs fn(i) for i in [0, n) over contiguous index chunks. Workers write
/// to disjoint outputs only; any reduction is performed by the caller in
/// fixed index order, so parallel and serial runs agree bit for bit.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace fracmem
