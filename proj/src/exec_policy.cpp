#include "relguide/exec_policy.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace relguide {

int worker_count(Exec exec) {
#ifdef _OPENMP
  return exec == Exec::kParallel ? omp_get_max_threads() : 1;
#else
  (void)exec;
  return 1;
#endif
}

}  // namespace relguide
