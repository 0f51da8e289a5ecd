#pragma once

#include <cstdint>
#include <string_view>

namespace ranklab {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// Process-wide limits for enumerating operations.
struct ExecutionConfig {
  std::uint64_t budget = 50'000'000;  // max enumerated items per call
  unsigned jobs = 1;                  // worker threads for tuple enumeration
};

/// Shared configuration; the budget is seeded from RANKLAB_BUDGET on first use.
ExecutionConfig& execution_config();

/// Throws BudgetExceeded when `size` exceeds the configured budget.
void check_budget(std::uint64_t size, std::string_view what);

/// Saturating product used for enumeration sizes.
std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b);

}  // namespace ranklab
