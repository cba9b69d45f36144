#include "nsldp/parallel.hpp"

namespace nsldp {

namespace {
std::atomic<int> g_default_workers{1};
}

int default_workers() { return g_default_workers.load(); }

void set_default_workers(int workers) {
  g_default_workers.store(workers < 1 ? int(std::max(1u, std::thread::hardware_concurrency())) : workers);
}

}  // namespace nsldp
