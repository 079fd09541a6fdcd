#include "arena/domain.hpp"

#include "arena/error.hpp"

namespace arena {

Frequency::Frequency(Duration step) : step_(step) {
  if (step.count() <= 0) throw Error(Errc::InvalidArgument, "frequency step must be positive");
}

bool Scope::matches(const BucketKey& bucket) const {
  if (domain && *domain != bucket.domain) return false;
  if (frequency && *frequency != bucket.frequency) return false;
  if (horizon && *horizon != bucket.horizon) return false;
  return true;
}

int horizon_steps(Duration horizon, Frequency frequency) {
  const auto step = frequency.step().count();
  if (horizon.count() <= 0 || horizon.count() % step != 0) {
    throw Error(Errc::NonDivisible, format_iso_duration(horizon) + " is not a positive multiple of " + frequency.iso());
  }
  return static_cast<int>(horizon.count() / step);
}

std::vector<Timestamp> horizon_grid(Timestamp t_p, Frequency frequency, int h) {
  if (h < 1) throw Error(Errc::InvalidArgument, "horizon must have at least one step");
  std::vector<Timestamp> grid;
  grid.reserve(static_cast<std::size_t>(h));
  for (int i = 1; i <= h; ++i) grid.push_back(t_p + i * frequency.step());
  return grid;
}

bool on_grid(Timestamp t, Frequency frequency) {
  return to_unix(t) % frequency.step().count() == 0;
}

}  // namespace arena
