#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gosp {

// Runs body(ctx, i) for i in [0, n) on `threads` workers. Each worker owns one
// context from make_ctx() and claims contiguous index chunks; results land at
// their index so the output never depends on scheduling.
template <class Result, class MakeCtx, class Body>
std::vector<Result> run_replicas(std::size_t n, int threads, MakeCtx make_ctx, Body body) {
  std::vector<Result> out(n);
  const std::size_t chunk = std::max<std::size_t>(1, std::min<std::size_t>(256, n / 64 + 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    try {
      auto ctx = make_ctx();
      for (;;) {
        std::size_t b = next.fetch_add(chunk);
        if (b >= n) break;
        std::size_t e = std::min(n, b + chunk);
        for (std::size_t i = b; i < e; ++i) out[i] = body(ctx, i);
      }
    } catch (...) {
      std::lock_guard lk(err_mu);
      if (!err) err = std::current_exception();
      next = n;
    }
  };
  int k = std::max(1, threads);
  if (k == 1 || n < 2) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < k; ++w) pool.emplace_back(worker);
  }
  if (err) std::rethrow_exception(err);
  return out;
}

struct NoContext {};

template <class Result, class Body>
std::vector<Result> run_replicas(std::size_t n, int threads, Body body) {
  return run_replicas<Result>(n, threads, [] { return NoContext{}; },
                              [&](NoContext&, std::size_t i) { return body(i); });
}

}  // namespace gosp
