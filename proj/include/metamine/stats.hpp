#pragma once

#include <cstdint>

namespace metamine::stats {

/// Upper critical value of the chi-square distribution with one degree of freedom.
double chi_square1_critical(double alpha_level);

/// Exact two-sided binomial p-value under p = 0.5: twice the smaller tail, clamped to 1.
/// Throws metamine::Error when total == 0 or successes > total.
double binomial_two_sided(std::int64_t successes, std::int64_t total);

}  // namespace metamine::stats
