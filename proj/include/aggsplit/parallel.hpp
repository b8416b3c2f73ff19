#pragma once

#include <cstddef>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

namespace aggsplit {

/// Runs f(i) for i in [0, count). Iterations must write disjoint outputs;
/// the caller reduces afterwards in index order, so results do not depend on
/// the thread count.
template <class F>
void parallel_for(std::size_t count, const F& f, std::size_t grain = 16) {
  if (count < 2 * grain) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, count, grain),
                    [&f](const tbb::blocked_range<std::size_t>& r) {
                      for (std::size_t i = r.begin(); i != r.end(); ++i) f(i);
                    });
}

}  // namespace aggsplit
