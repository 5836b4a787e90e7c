#pragma once

// Records the largest heap block requested while armed. Include from exactly
// one translation unit per executable: it replaces malloc for the process.

#include <atomic>
#include <cstddef>

extern "C" void* __libc_malloc(std::size_t);
extern "C" void* __libc_calloc(std::size_t, std::size_t);
extern "C" void* __libc_realloc(void*, std::size_t);

namespace alloc_probe {

inline std::atomic<bool> armed{false};
inline std::atomic<std::size_t> largest{0};
inline std::atomic<std::size_t> count{0};

inline void note(std::size_t bytes) {
  if (!armed.load(std::memory_order_relaxed)) return;
  count.fetch_add(1, std::memory_order_relaxed);
  std::size_t prev = largest.load(std::memory_order_relaxed);
  while (bytes > prev && !largest.compare_exchange_weak(prev, bytes)) {
  }
}

struct Scope {
  Scope() {
    largest = 0;
    count = 0;
    armed = true;
  }
  ~Scope() { armed = false; }
};

}  // namespace alloc_probe

extern "C" void* malloc(std::size_t n) {
  alloc_probe::note(n);
  return __libc_malloc(n);
}

extern "C" void* calloc(std::size_t a, std::size_t b) {
  alloc_probe::note(a * b);
  return __libc_calloc(a, b);
}

extern "C" void* realloc(void* p, std::size_t n) {
  alloc_probe::note(n);
  return __libc_realloc(p, n);
}
