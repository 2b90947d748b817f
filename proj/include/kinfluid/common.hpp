#pragma once
// Shared small utilities: error types, invariant checks, deterministic
// parallel loops, and seeding helpers.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace kinfluid {

// Thrown for violated numerical invariants and inconsistent arguments.
class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown for malformed configuration / CLI input (exit code 2 at the CLI).
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw error(msg);
}

#define KF_REQUIRE(cond, msg) ::kinfluid::require((cond), std::string(msg) + " [" #cond "]")

inline double sq(double x) { return x * x; }
inline double cube(double x) { return x * x * x; }

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw error(std::string("non-finite value in ") + what);
}

template <class Vec>
inline void require_finite(const Vec& v, const char* what) {
  for (double x : v) require_finite(x, what);
}

// FNV-1a, used to derive per-case RNG seeds from stable strings so that test
// fixtures do not depend on declaration order.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Deterministic parallel loop: [0, n) is split into contiguous chunks, one
// per worker.  Each index must write only its own outputs; reductions are the
// caller's job (accumulate per index, fold serially in index order).  The
// result is then bit-identical for every worker count, which the
// reproducibility tests rely on.
inline void parallel_for(std::size_t n, int num_threads,
                         const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  if (num_threads < 1) num_threads = 1;
  const std::size_t workers = std::min<std::size_t>(num_threads, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace kinfluid
