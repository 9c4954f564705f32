#include "bench.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>

#include "colltime/exact.hpp"
#include "colltime/lattice.hpp"
#include "colltime/montecarlo.hpp"
#include "colltime/polymer.hpp"
#include "colltime/replica.hpp"

namespace colltime::tools {

namespace {

void line(std::ostream& out, const std::string& name, double work, const char* unit, const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-28s %10.3f s  %12.4g %s/s", name.c_str(), s, work / s, unit);
  out << buf << '\n';
}

}  // namespace

int run_bench(std::ostream& out, std::int64_t scale, unsigned workers) {
  const std::int64_t N = scale;
  const std::int64_t R = default_radius(N);
  const double cells = static_cast<double>(N) * static_cast<double>((2 * R + 1) * (2 * R + 1)) / 2.0;
  line(out, "kernel_table N=" + std::to_string(N), cells, "site-updates", [&] { build_kernel_table(N, R); });
  line(out, "pair_dp N=" + std::to_string(N), cells * 2, "site-updates", [&] { laplace_pair_exact(N, 0.5); });
  line(out, "replica_marginals N=" + std::to_string(16 * N), 0.5 * 256.0 * N * N, "terms",
       [&] { replica_marginals(16 * N, 0.5); });
  const std::int64_t steps = 1000 * N;
  line(out, "collisions h=3 N=" + std::to_string(steps), 3.0 * 1000.0 * static_cast<double>(steps), "walk-steps",
       [&] { simulate_collisions(steps, 3, 1000, 1, workers); });
  const double beta[1] = {0.5};
  PolymerOptions po;
  po.workers = workers;
  line(out, "polymer N=" + std::to_string(N) + " x64", 64.0, "environments",
       [&] { sample_partition_functions(N, beta, 64, 1, po); });
  return 0;
}

}  // namespace colltime::tools
