#include "rogue/parallel.hpp"

#include <cstdlib>
#include <string>

#include "rogue/errors.hpp"

namespace rogue {

int resolve_jobs(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ValidationError("--jobs must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("RW_JOBS"); env && *env) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(env, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != std::string(env).size() || v < 1) {
      throw ValidationError(std::string("RW_JOBS must be a positive integer, got '") + env + "'");
    }
    return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace rogue
