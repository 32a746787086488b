#include "lrp/parallel.hpp"

namespace lrp {

namespace {
std::atomic<unsigned> g_workers{0};
}

void set_default_workers(unsigned workers) { g_workers = workers; }

unsigned default_workers() {
  unsigned w = g_workers.load();
  if (w == 0) w = std::max(1U, std::thread::hardware_concurrency());
  return w;
}

}  // namespace lrp
