#include "arena/kernels.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace arena::kernels {
namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

MaseRow score_row(std::span<const double> forecast, std::span<const double> actuals, double scale) {
  MaseRow row;
  double sum = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    if (std::isnan(actuals[i])) continue;
    sum += std::fabs(forecast[i] - actuals[i]);
    ++row.observed;
  }
  row.mae = row.observed > 0 ? sum / row.observed : kNaN;
  const bool usable_scale = std::isfinite(scale) && scale > 0.0;
  row.mase = (row.observed > 0 && usable_scale) ? row.mae / scale : kNaN;
  return row;
}

double seasonal_scale_row(std::span<const double> context, int m) {
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t t = static_cast<std::size_t>(m); t < context.size(); ++t) {
    const double now = context[t];
    const double back = context[t - static_cast<std::size_t>(m)];
    if (std::isnan(now) || std::isnan(back)) continue;
    sum += std::fabs(now - back);
    ++pairs;
  }
  return pairs > 0 ? sum / pairs : kNaN;
}

std::vector<MaseRow> score_serial(const MaseBatch& batch) {
  std::vector<MaseRow> out(static_cast<std::size_t>(batch.rows));
  const std::size_t h = static_cast<std::size_t>(batch.h);
  for (int r = 0; r < batch.rows; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * h;
    out[static_cast<std::size_t>(r)] = score_row(std::span(batch.forecasts).subspan(off, h),
                                                 std::span(batch.actuals).subspan(off, h), batch.scales[r]);
  }
  return out;
}

std::vector<MaseRow> score_parallel(const MaseBatch& batch) {
  std::vector<MaseRow> out(static_cast<std::size_t>(batch.rows));
  const std::size_t h = static_cast<std::size_t>(batch.h);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < batch.rows; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * h;
    out[static_cast<std::size_t>(r)] = score_row(std::span(batch.forecasts).subspan(off, h),
                                                 std::span(batch.actuals).subspan(off, h), batch.scales[r]);
  }
  return out;
}

std::vector<double> seasonal_scale_serial(const ScaleBatch& batch) {
  std::vector<double> out(static_cast<std::size_t>(batch.rows));
  const std::size_t len = static_cast<std::size_t>(batch.length);
  for (int r = 0; r < batch.rows; ++r) {
    out[static_cast<std::size_t>(r)] =
        seasonal_scale_row(std::span(batch.contexts).subspan(static_cast<std::size_t>(r) * len, len), batch.m);
  }
  return out;
}

std::vector<double> seasonal_scale_parallel(const ScaleBatch& batch) {
  std::vector<double> out(static_cast<std::size_t>(batch.rows));
  const std::size_t len = static_cast<std::size_t>(batch.length);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < batch.rows; ++r) {
    out[static_cast<std::size_t>(r)] =
        seasonal_scale_row(std::span(batch.contexts).subspan(static_cast<std::size_t>(r) * len, len), batch.m);
  }
  return out;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace arena::kernels
