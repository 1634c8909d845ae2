#pragma once

#include "dyadlab/simd/kernels.hpp"

namespace dyadlab::simd::detail {

extern const KernelTable kScalarTable;
#if defined(DYADLAB_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace dyadlab::simd::detail
