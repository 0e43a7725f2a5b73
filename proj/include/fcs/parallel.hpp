#pragma once

#include <cstddef>

namespace fcs {

/// Caps the OpenMP worker count for all parallel kernels. 0 restores the
/// runtime default. No effect in builds without OpenMP.
void set_num_threads(int n);

int max_threads();

bool openmp_enabled();

}  // namespace fcs
