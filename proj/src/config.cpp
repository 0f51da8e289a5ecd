#include "ranklab/config.hpp"

#include "ranklab/error.hpp"

#include <cstdlib>
#include <limits>
#include <string>

namespace ranklab {

ExecutionConfig& execution_config() {
  static ExecutionConfig config = [] {
    ExecutionConfig c;
    if (const char* env = std::getenv("RANKLAB_BUDGET")) {
      try {
        const unsigned long long v = std::stoull(env);
        if (v > 0) c.budget = v;
      } catch (const std::exception&) {
        throw Error(ErrorCode::UsageError, "RANKLAB_BUDGET must be a positive integer");
      }
    }
    return c;
  }();
  return config;
}

void check_budget(std::uint64_t size, std::string_view what) {
  const std::uint64_t budget = execution_config().budget;
  if (size > budget)
    throw Error(ErrorCode::BudgetExceeded, std::string(what) + " needs " + std::to_string(size) +
                                               " items, budget is " + std::to_string(budget));
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out)) return std::numeric_limits<std::uint64_t>::max();
  return out;
}

}  // namespace ranklab
