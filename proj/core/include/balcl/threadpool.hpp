#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace balcl {

// Fixed-size worker pool over a task queue. Tasks may not throw; results
// must be communicated through captured state (callers preallocate slots so
// merges stay deterministic regardless of execution order).
class ThreadPool {
 public:
  explicit ThreadPool(int threads) {
    if (threads < 1) threads = 1;
    workers_.reserve(threads);
    for (int t = 0; t < threads; ++t)
      workers_.emplace_back([this] {
        for (;;) {
          std::function<void()> task;
          {
            std::unique_lock<std::mutex> lock(mu_);
            cv_task_.wait(lock, [this] { return stop_ || !queue_.empty(); });
            if (stop_ && queue_.empty()) return;
            task = std::move(queue_.front());
            queue_.pop_front();
            ++active_;
          }
          task();
          {
            std::lock_guard<std::mutex> lock(mu_);
            --active_;
            if (queue_.empty() && active_ == 0) cv_done_.notify_all();
          }
        }
      });
  }

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      stop_ = true;
    }
    cv_task_.notify_all();
    for (std::thread& w : workers_) w.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  void submit(std::function<void()> task) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      queue_.push_back(std::move(task));
    }
    cv_task_.notify_one();
  }

  // Blocks until every submitted task has finished.
  void wait() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_done_.wait(lock, [this] { return queue_.empty() && active_ == 0; });
  }

  int size() const { return static_cast<int>(workers_.size()); }

 private:
  std::vector<std::thread> workers_;
  std::deque<std::function<void()>> queue_;
  std::mutex mu_;
  std::condition_variable cv_task_, cv_done_;
  int active_ = 0;
  bool stop_ = false;
};

// Runs fn(i) for every i in [0, count), split into contiguous chunks across
// the pool, and blocks until done.
inline void parallel_for(ThreadPool& pool, int count, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int chunks = std::min(count, 4 * pool.size());
  const int per = (count + chunks - 1) / chunks;
  for (int c = 0; c < chunks; ++c) {
    int lo = c * per;
    int hi = std::min(count, lo + per);
    if (lo >= hi) break;
    pool.submit([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  pool.wait();
}

}  // namespace balcl
