#include "metamine/stats.hpp"

#include <algorithm>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "metamine/data_model.hpp"

namespace metamine::stats {

double chi_square1_critical(double alpha_level) {
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) {
    throw Error("alpha level must lie in (0,1)");
  }
  boost::math::chi_squared_distribution<double> dist(1.0);
  return boost::math::quantile(boost::math::complement(dist, alpha_level));
}

double binomial_two_sided(std::int64_t successes, std::int64_t total) {
  if (total <= 0) throw Error("binomial test needs at least one trial");
  if (successes < 0 || successes > total) throw Error("binomial test: successes out of range");
  boost::math::binomial_distribution<double> dist(static_cast<double>(total), 0.5);
  const double k = static_cast<double>(successes);
  const double lower = boost::math::cdf(dist, k);
  // P(X >= k) = 1 - P(X <= k-1)
  const double upper = successes == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, k - 1.0));
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

}  // namespace metamine::stats
