#include "stimfolio/pipeline/workers.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "stimfolio/errors.hpp"

namespace stimfolio::pipeline {

std::size_t resolve_workers(std::optional<std::size_t> cli_request, std::size_t config_value) {
  if (cli_request && *cli_request > 0) return *cli_request;
  if (const char* env = std::getenv("STIMFOLIO_WORKERS"); env && *env) {
    try {
      std::size_t used = 0;
      const long v = std::stol(env, &used);
      if (used == std::string(env).size() && v > 0) return std::size_t(v);
    } catch (const std::exception&) {
    }
    throw ConfigError("STIMFOLIO_WORKERS must be a positive integer");
  }
  if (config_value > 0) return config_value;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex err_mutex;
  std::size_t err_index = n;
  std::exception_ptr err;

  auto body = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
        stop.store(true);
      }
    }
  };

  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace stimfolio::pipeline
