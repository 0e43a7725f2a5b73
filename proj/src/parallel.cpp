#include "fcs/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fcs {

#ifdef _OPENMP
namespace {
int g_default_threads = 0;
}

void set_num_threads(int n) {
  if (g_default_threads == 0) g_default_threads = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : g_default_threads);
}

int max_threads() { return omp_get_max_threads(); }

bool openmp_enabled() { return true; }
#else
void set_num_threads(int) {}
int max_threads() { return 1; }
bool openmp_enabled() { return false; }
#endif

}  // namespace fcs
