#include "kdeforge/threads.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

namespace kdeforge {

namespace {

std::atomic<std::size_t> g_override{0};

std::size_t default_threads() {
  if (const char* env = std::getenv("KDEFORGE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

std::size_t max_threads() noexcept {
  const std::size_t o = g_override.load(std::memory_order_relaxed);
  if (o > 0) return o;
  static const std::size_t fallback = default_threads();
  return fallback;
}

void set_max_threads(std::size_t count) noexcept { g_override.store(count, std::memory_order_relaxed); }

}  // namespace kdeforge
