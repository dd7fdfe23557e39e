#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace stimfolio::pipeline {

/// Worker count: explicit request, else STIMFOLIO_WORKERS, else the config
/// value, else the hardware concurrency. Always >= 1.
std::size_t resolve_workers(std::optional<std::size_t> cli_request, std::size_t config_value);

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Each index runs exactly
/// once; callers write results into pre-sized slots so output order never depends
/// on scheduling. The first exception (lowest index) is rethrown after all workers
/// stop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace stimfolio::pipeline
