#pragma once

// Batch scoring kernels. Each kernel has an OpenMP version and a plain serial
// version with identical per-row arithmetic; the serial one is the reference
// the tests and the benchmark compare against.
//
// Rows are dense and row-major. Missing observations are NaN.

#include <span>
#include <vector>

namespace arena::kernels {

/// forecasts/actuals are rows x h; scales has one entry per row. A row's
/// scale <= 0 or NaN marks a degenerate scale.
struct MaseBatch {
  int rows = 0;
  int h = 0;
  std::vector<double> forecasts;
  std::vector<double> actuals;
  std::vector<double> scales;
};

struct MaseRow {
  double mae = 0.0;    // NaN if no step observed
  double mase = 0.0;   // NaN if undefined (no observation or degenerate scale)
  int observed = 0;
};

std::vector<MaseRow> score_serial(const MaseBatch& batch);
std::vector<MaseRow> score_parallel(const MaseBatch& batch);

/// contexts is rows x length on a contiguous grid (NaN = gap). Returns the
/// in-sample mean absolute seasonal difference at lag m per row, or NaN when
/// no usable pair exists. Zero means a degenerate (constant-difference) scale.
struct ScaleBatch {
  int rows = 0;
  int length = 0;
  int m = 1;
  std::vector<double> contexts;
};

std::vector<double> seasonal_scale_serial(const ScaleBatch& batch);
std::vector<double> seasonal_scale_parallel(const ScaleBatch& batch);

// Single-row helpers shared by both paths.
MaseRow score_row(std::span<const double> forecast, std::span<const double> actuals, double scale);
double seasonal_scale_row(std::span<const double> context, int m);

int max_threads();

}  // namespace arena::kernels
