#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "lgcl/kernels.hpp"

namespace lgcl::kernels {

#ifndef LGCL_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(LGCL_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      return avx2_table() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

namespace {

const KernelTable* detect() {
  if (const char* forced = std::getenv("LGCL_ISA"); forced && std::string(forced) == "scalar") {
    return &scalar_table();
  }
  if (cpu_supports(Isa::avx2)) return avx2_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!cpu_supports(isa)) throw std::runtime_error("ISA " + std::string(to_string(isa)) + " not available");
  current().store(isa == Isa::avx2 ? avx2_table() : &scalar_table(), std::memory_order_relaxed);
}

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace lgcl::kernels
