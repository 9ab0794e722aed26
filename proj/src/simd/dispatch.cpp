#include <cstdlib>
#include <string_view>

#include "dini/simd.hpp"

namespace dini::simd {

const KernelTable& active() {
  static const KernelTable& selected = [&]() -> const KernelTable& {
    const char* forced = std::getenv("DINI_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return *t;
    return scalar_kernels();
  }();
  return selected;
}

}  // namespace dini::simd
