#pragma once

#include <atomic>
#include <chrono>
#include <mutex>

#include "arena/time.hpp"

namespace arena {

/// The single clock-injection seam. Every server-side timestamp (tx_time,
/// served_at, received_at) is read from here.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override {
    return std::chrono::floor<Duration>(std::chrono::system_clock::now());
  }
};

/// Simulation clock. In stepped mode time moves only through advance();
/// realtime and accelerated modes follow the wall clock from an origin.
class VirtualClock final : public Clock {
 public:
  enum class Mode { stepped, realtime, accelerated };

  explicit VirtualClock(Timestamp start, Mode mode = Mode::stepped, double factor = 1.0);

  Timestamp now() const override;

  // Stepped mode only; never moves time backwards.
  void advance(Duration by);
  void advance_to(Timestamp t);

  Mode mode() const noexcept { return mode_; }
  double factor() const noexcept { return factor_; }

 private:
  Mode mode_;
  double factor_;
  std::chrono::steady_clock::time_point origin_real_;
  Timestamp origin_virtual_;
  std::atomic<long long> stepped_now_;
  mutable std::mutex monotone_mutex_;
  mutable Timestamp last_reported_;
};

}  // namespace arena
