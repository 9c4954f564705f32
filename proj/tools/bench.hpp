#pragma once

#include <cstdint>
#include <iosfwd>

namespace colltime::tools {

// Throughput of the main kernels at a given scale, one line per kernel.
int run_bench(std::ostream& out, std::int64_t scale, unsigned workers);

}  // namespace colltime::tools
