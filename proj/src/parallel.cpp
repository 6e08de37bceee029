#include "hyperclust/parallel.hpp"

#include <omp.h>

#include <algorithm>

namespace hyperclust {

void set_num_threads(int threads) { omp_set_num_threads(std::max(1, threads)); }

int num_threads() { return omp_get_max_threads(); }

}  // namespace hyperclust
