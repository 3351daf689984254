#include "lada/log.hpp"

#include <atomic>
#include <iostream>

namespace lada {

namespace {
std::atomic<bool> g_warnings{true};
}

void warn(std::string_view msg) {
  if (g_warnings.load(std::memory_order_relaxed)) std::cerr << "warning: " << msg << '\n';
}

void set_warnings_enabled(bool enabled) noexcept { g_warnings.store(enabled); }

}  // namespace lada
