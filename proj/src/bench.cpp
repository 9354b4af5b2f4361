#include "monolab/bench.hpp"

#include <chrono>
#include <cstdio>

namespace monolab {

std::vector<BenchResult> bench(const std::vector<ModelSpec>& models, const TimeGrid& grid,
                               const std::vector<Index>& path_ladder, const std::vector<int>& worker_ladder,
                               std::uint64_t seed, const IntegratorConfig& config) {
  if (grid.steps < 1) throw std::invalid_argument("bench needs at least one time step");
  const TimeGrid final_only = TimeGrid::make(grid.horizon, grid.dt);
  std::vector<BenchResult> out;
  for (const auto& model : models) {
    const Vec z0 = Vec::Constant(model.dim(), 0.5);
    for (Index paths : path_ladder) {
      for (int workers : worker_ladder) {
        set_worker_count(workers);
        const auto start = std::chrono::steady_clock::now();
        const PathEnsemble e = simulate_plain(model, z0, final_only, paths, seed, config);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        BenchResult r;
        r.model = model.id;
        r.dims = model.dim();
        r.dt = grid.dt;
        r.paths = paths;
        r.steps = final_only.steps;
        r.wall_seconds = wall;
        r.path_steps_per_sec = wall > 0.0 ? static_cast<double>(paths) * static_cast<double>(r.steps) / wall : 0.0;
        r.workers = workers;
        out.push_back(r);
        (void)e;
      }
    }
  }
  set_worker_count(0);
  return out;
}

std::string bench_csv(const std::vector<BenchResult>& rows) {
  std::string out = "model,dims,dt,paths,steps,wall_seconds,path_steps_per_sec,workers\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%lld,%.6g,%lld,%lld,%.6f,%.6g,%d\n", r.model.c_str(),
                  static_cast<long long>(r.dims), r.dt, static_cast<long long>(r.paths),
                  static_cast<long long>(r.steps), r.wall_seconds, r.path_steps_per_sec, r.workers);
    out += buf;
  }
  return out;
}

}  // namespace monolab
