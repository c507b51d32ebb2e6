#include "cechstat/parallel.hpp"

namespace cechstat {

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_default_threads(unsigned threads) noexcept { g_threads = threads; }

unsigned default_threads() noexcept {
  const unsigned t = g_threads.load();
  if (t != 0) return t;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace cechstat
