#include "arena/clock.hpp"

#include "arena/error.hpp"

namespace arena {

VirtualClock::VirtualClock(Timestamp start, Mode mode, double factor)
    : mode_(mode),
      factor_(mode == Mode::realtime ? 1.0 : factor),
      origin_real_(std::chrono::steady_clock::now()),
      origin_virtual_(start),
      stepped_now_(to_unix(start)),
      last_reported_(start) {
  if (factor_ <= 0.0) throw Error(Errc::InvalidArgument, "clock acceleration factor must be positive");
}

Timestamp VirtualClock::now() const {
  Timestamp t;
  if (mode_ == Mode::stepped) {
    t = from_unix(stepped_now_.load());
  } else {
    auto real = std::chrono::steady_clock::now() - origin_real_;
    auto scaled = std::chrono::duration<double>(real).count() * factor_;
    t = origin_virtual_ + Duration{static_cast<long long>(scaled)};
  }
  std::lock_guard lock(monotone_mutex_);
  if (t < last_reported_) t = last_reported_;
  last_reported_ = t;
  return t;
}

void VirtualClock::advance(Duration by) {
  if (mode_ != Mode::stepped) throw Error(Errc::InvalidArgument, "advance() requires a stepped clock");
  if (by.count() < 0) throw Error(Errc::ClockRegression, "virtual clock cannot move backwards");
  stepped_now_ += by.count();
}

void VirtualClock::advance_to(Timestamp t) {
  if (mode_ != Mode::stepped) throw Error(Errc::InvalidArgument, "advance_to() requires a stepped clock");
  if (to_unix(t) < stepped_now_.load()) throw Error(Errc::ClockRegression, "virtual clock cannot move backwards");
  stepped_now_ = to_unix(t);
}

}  // namespace arena
