#include <string>

#include "becsplit/errors.hpp"
#include "becsplit/kernels.hpp"

namespace becsplit::kernels {

#if defined(BECSPLIT_BUILD_AVX2)
const Backend* avx2_table();  // avx2.cpp
#endif

const Backend* avx2() {
#if defined(BECSPLIT_BUILD_AVX2)
  static const Backend* table = []() -> const Backend* {
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
      return avx2_table();
    return nullptr;
  }();
  return table;
#else
  return nullptr;
#endif
}

namespace {
const Backend* g_active = nullptr;
}

const Backend& active() {
  if (g_active == nullptr) g_active = avx2() != nullptr ? avx2() : &scalar();
  return *g_active;
}

void force_backend(std::string_view name) {
  if (name == "auto") {
    g_active = avx2() != nullptr ? avx2() : &scalar();
  } else if (name == "scalar") {
    g_active = &scalar();
  } else if (name == "avx2") {
    if (avx2() == nullptr)
      throw ConfigError("kernel backend 'avx2' is not available on this host");
    g_active = avx2();
  } else {
    throw ConfigError("unknown kernel backend: " + std::string(name));
  }
}

std::string_view active_name() { return active().name; }

}  // namespace becsplit::kernels
