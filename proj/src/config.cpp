#include "mixclass/config.hpp"

#include <cmath>

#include "mixclass/errors.hpp"

namespace mixclass {

int BudgetConfig::gaussian_label_count(int k, double epsilon) const {
  if (gaussian_labels_override > 0) return gaussian_labels_override;
  if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
  double ratio = k / epsilon;
  return static_cast<int>(std::ceil(c_g * ratio * std::log(ratio + std::exp(1.0))));
}

int BudgetConfig::subgaussian_round_count(int n, int k, double epsilon) const {
  if (subgaussian_rounds_override > 0) return subgaussian_rounds_override;
  if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
  double e4 = epsilon * epsilon * epsilon * epsilon;
  return static_cast<int>(std::ceil(c_s * k / e4 * std::log(std::max(n, 2))));
}

double BudgetConfig::inf_value(int k, double mu_min) const {
  if (!(mu_min > 0.0)) throw ConfigError("Inf bound needs a positive minimum magnitude");
  double inf = inf_scale * max_query_magnitude * std::sqrt(static_cast<double>(k)) / mu_min;
  if (!std::isfinite(inf) || !(inf * mu_min > max_query_magnitude * std::sqrt(double(k))))
    throw ConfigError("Inf bound violated for this instance");
  return inf;
}

}  // namespace mixclass
