#include "rain/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rain {

namespace {
std::atomic<int> g_jobs{1};
}

void set_jobs(int j) { g_jobs.store(j < 1 ? 1 : j); }

int jobs() { return g_jobs.load(); }

bool parallel_enabled() {
#ifdef _OPENMP
  return jobs() > 1;
#else
  return false;
#endif
}

}  // namespace rain
