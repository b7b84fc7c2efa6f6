#pragma once

// Thread fan-out with reductions whose result does not depend on the
// number of workers: work is split into fixed index blocks and partial
// results are combined by pairwise summation in index order.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cvp {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> n{1};
  return n;
}
}  // namespace detail

inline void set_threads(int n) { detail::thread_setting() = std::max(1, n); }
inline int threads() { return detail::thread_setting().load(); }

// Reads CAL_THREADS; returns fallback when unset or malformed.
inline int threads_from_env(int fallback = 1) {
  const char* s = std::getenv("CAL_THREADS");
  if (!s || !*s) return fallback;
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) return fallback;
  return static_cast<int>(v);
}

// Calls f(i) for i in [0, n). Each index is visited exactly once; f must
// only write to slots owned by i.
template <class F>
void parallel_for(std::size_t n, F&& f, int nthreads = threads()) {
  if (n == 0) return;
  std::size_t workers = std::min<std::size_t>(std::max(1, nthreads), n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto body = [&] {
    try {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        f(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!err) err = std::current_exception();
      next = n;
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// Pairwise sum over a fixed index range.
template <class T>
T tree_sum(const T* v, std::size_t n) {
  if (n == 0) return T{};
  if (n == 1) return v[0];
  if (n <= 8) {
    T s = v[0];
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return tree_sum(v, h) + tree_sum(v + h, n - h);
}

template <class T>
T tree_sum(const std::vector<T>& v) {
  return tree_sum(v.data(), v.size());
}

}  // namespace cvp
