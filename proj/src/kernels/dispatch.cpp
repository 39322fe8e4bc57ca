#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "delecho/kernels/kernels.hpp"

namespace delecho::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa pick() {
  const char* env = std::getenv("DELECHO_KERNELS");
  if (env && std::string_view(env) == "scalar") return Isa::Scalar;
  if (avx2_table() && cpu_has_avx2()) return Isa::Avx2;
  if (neon_table()) return Isa::Neon;
  return Isa::Scalar;
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2: return avx2_table() != nullptr && cpu_has_avx2();
    case Isa::Neon: return neon_table() != nullptr;
  }
  return false;
}

const Table& table_for(Isa isa) {
  if (!isa_available(isa)) throw std::runtime_error("kernel set not available: " + isa_name(isa));
  switch (isa) {
    case Isa::Avx2: return *avx2_table();
    case Isa::Neon: return *neon_table();
    default: return scalar_table();
  }
}

Isa active_isa() {
  static const Isa isa = pick();
  return isa;
}

const Table& active() {
  static const Table& t = table_for(active_isa());
  return t;
}

std::string isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace delecho::kernels
