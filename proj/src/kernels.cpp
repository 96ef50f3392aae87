#include "tomo/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace tomo::kernels {
namespace {

struct Choice {
  const Table* table;
  const char* name;
};

Choice pick() {
  const char* env = std::getenv("TOMO_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return {&scalar_table(), "scalar"};
  const Table* avx2 = avx2_table();
  if (env && std::strcmp(env, "avx2") == 0 && avx2) return {avx2, "avx2"};
  if (!env && avx2) return {avx2, "avx2"};
  return {&scalar_table(), "scalar"};
}

const Choice& choice() {
  static const Choice c = pick();
  return c;
}

}  // namespace

const Table& active() { return *choice().table; }
const char* active_isa() { return choice().name; }

}  // namespace tomo::kernels
