#pragma once

#include <cstddef>
#include <functional>

namespace smal {

/// Runs fn(i) for i in [0, n) on up to `threads` workers with a static block
/// partition. Results must be written to index-addressed slots so the output
/// is identical for any thread count. threads <= 1 runs serially.
void parallel_for_indexed(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace smal
