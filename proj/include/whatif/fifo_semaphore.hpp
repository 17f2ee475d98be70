#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <set>
#include <stdexcept>

namespace whatif {

/// Counting semaphore that admits waiters strictly in arrival order. A
/// waiter that gives up leaves the queue without blocking those behind it.
class FifoSemaphore {
 public:
  explicit FifoSemaphore(int permits) : permits_(permits) {
    if (permits < 1) throw std::invalid_argument("semaphore needs at least one permit");
  }

  /// Returns false if the deadline passed before a permit was free.
  bool acquire_until(std::chrono::steady_clock::time_point deadline) {
    std::unique_lock lock(mutex_);
    const auto ticket = next_ticket_++;
    const bool ok = cv_.wait_until(lock, deadline, [&] { return ticket == serving_ && active_ < permits_; });
    if (!ok) {
      abandoned_.insert(ticket);
      skip_abandoned();
      cv_.notify_all();
      return false;
    }
    ++serving_;
    ++active_;
    skip_abandoned();
    cv_.notify_all();
    return true;
  }

  void acquire() { acquire_until(std::chrono::steady_clock::time_point::max()); }

  void release() {
    std::lock_guard lock(mutex_);
    --active_;
    cv_.notify_all();
  }

  int active() const {
    std::lock_guard lock(mutex_);
    return active_;
  }

  /// Waiters queued behind the running holders.
  std::int64_t waiting() const {
    std::lock_guard lock(mutex_);
    return static_cast<std::int64_t>(next_ticket_ - serving_) -
           static_cast<std::int64_t>(abandoned_.size());
  }

 private:
  void skip_abandoned() {
    while (abandoned_.erase(serving_)) ++serving_;
  }

  const int permits_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
  int active_ = 0;
  std::set<std::uint64_t> abandoned_;
};

/// Releases an acquired permit on scope exit.
class PermitGuard {
 public:
  explicit PermitGuard(FifoSemaphore& sem) : sem_(sem) {}
  ~PermitGuard() { sem_.release(); }
  PermitGuard(const PermitGuard&) = delete;
  PermitGuard& operator=(const PermitGuard&) = delete;

 private:
  FifoSemaphore& sem_;
};

}  // namespace whatif
