#pragma once

namespace hyperclust {

// Thread count used by the row-parallel kernels. Results never depend on it:
// every parallel loop writes disjoint output rows and reductions are
// performed sequentially afterwards.
void set_num_threads(int threads);
int num_threads();

}  // namespace hyperclust
