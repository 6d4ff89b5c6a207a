#pragma once

#include "spde/common.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace spde {

struct EnsembleOptions {
  unsigned workers = 0;          // 0: SPDE_WORKERS or hardware concurrency
  std::size_t block_size = 1024;  // paths computed concurrently before folding
};

/// Runs work(i) for i in [0, n) on a worker pool and calls fold(i, record)
/// strictly in ascending i, so reductions do not depend on the worker count.
template <class Work, class Fold>
void ordered_ensemble(std::size_t n, Work&& work, Fold&& fold, const EnsembleOptions& opt = {}) {
  using Record = decltype(work(std::size_t{0}));
  const unsigned workers = opt.workers ? opt.workers : workers_from_env();
  const std::size_t block = std::max<std::size_t>(1, opt.block_size);
  std::vector<std::optional<Record>> buf;
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t len = std::min(block, n - start);
    buf.assign(len, std::nullopt);
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto run = [&] {
      for (;;) {
        const std::size_t j = next.fetch_add(1);
        if (j >= len) return;
        try {
          buf[j].emplace(work(start + j));
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          next.store(len);
          return;
        }
      }
    };
    const unsigned nt = static_cast<unsigned>(std::min<std::size_t>(workers, len));
    if (nt <= 1) {
      run();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(nt);
      for (unsigned t = 0; t < nt; ++t) pool.emplace_back(run);
      for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);
    for (std::size_t j = 0; j < len; ++j) fold(start + j, std::move(*buf[j]));
  }
}

/// Cellwise Welford moments of a matrix-valued per-path record.
class MomentTable {
public:
  MomentTable() = default;
  MomentTable(Eigen::Index rows, Eigen::Index cols);
  void add(const Mat& record);

  std::size_t count() const { return n_; }
  const Mat& mean() const { return mean_; }
  Mat variance() const;  // unbiased
  Mat standard_error() const;

private:
  std::size_t n_ = 0;
  Mat mean_, m2_;
};

/// Runs work(i) -> Mat record of fixed shape and accumulates moments in order.
template <class Work>
MomentTable ensemble_moments(std::size_t n, Eigen::Index rows, Eigen::Index cols, Work&& work,
                             const EnsembleOptions& opt = {}) {
  MomentTable table(rows, cols);
  ordered_ensemble(
      n, [&](std::size_t i) { return Mat(work(i)); },
      [&](std::size_t, Mat&& r) { table.add(r); }, opt);
  return table;
}

}  // namespace spde
