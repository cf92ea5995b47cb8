#include "msct/parallel.hpp"

#include <omp.h>

namespace msct {

namespace {
const int kDefaultThreads = omp_get_max_threads();
}

void set_thread_count(int threads) { omp_set_num_threads(threads > 0 ? threads : kDefaultThreads); }

int thread_count() { return omp_get_max_threads(); }

} // namespace msct
