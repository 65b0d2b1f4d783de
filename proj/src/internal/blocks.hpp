#pragma once

#include <algorithm>

#include "dgflow/forms.hpp"

namespace dgflow::detail {

// Elements are processed in column blocks so basis evaluations become
// matrix products over many elements at once.
constexpr int kBlock = 256;

template <class Fn>
void for_blocks(int nt, Exec exec, Fn&& fn) {
  const int nblocks = (nt + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int c = 0; c < nblocks; ++c) fn(c * kBlock, std::min(kBlock, nt - c * kBlock));
}

}  // namespace dgflow::detail
