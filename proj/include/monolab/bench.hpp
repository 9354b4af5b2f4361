#pragma once

#include "monolab/integrate.hpp"

#include <string>
#include <vector>

namespace monolab {

struct BenchResult {
  std::string model;
  Index dims = 0;
  double dt = 0.0;
  Index paths = 0;
  std::int64_t steps = 0;
  double wall_seconds = 0.0;
  double path_steps_per_sec = 0.0;  // paths * steps / wall, Newton iterations included in the wall time
  int workers = 1;
};

/// One plain ensemble per (model, paths, workers), started from 0.5 in every
/// coordinate. Clears the worker override afterwards.
std::vector<BenchResult> bench(const std::vector<ModelSpec>& models, const TimeGrid& grid,
                               const std::vector<Index>& path_ladder, const std::vector<int>& worker_ladder,
                               std::uint64_t seed, const IntegratorConfig& config = {});

std::string bench_csv(const std::vector<BenchResult>& rows);

}  // namespace monolab
