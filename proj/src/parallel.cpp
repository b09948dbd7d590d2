#include "hullbound/parallel.hpp"

#include <atomic>

namespace hullbound {

namespace {
std::atomic<std::size_t> g_workers{std::max<std::size_t>(1, std::thread::hardware_concurrency())};
}

std::size_t worker_count() { return g_workers.load(); }

void set_worker_count(std::size_t workers) { g_workers.store(std::max<std::size_t>(1, workers)); }

}  // namespace hullbound
