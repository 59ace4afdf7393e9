#include "dynostore/placement/planner.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>

#include "dynostore/domain/error.hpp"

namespace dynostore::placement {

double loss_probability(std::span<const double> rates, unsigned k) {
  const std::size_t n = rates.size();
  if (k == 0) return 0.0;
  if (k > n) return 1.0;
  // dp[j] = P(exactly j failures among the containers seen so far)
  std::vector<long double> dp(n + 1, 0.0L);
  dp[0] = 1.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double p = rates[i];
    for (std::size_t j = i + 1; j > 0; --j) dp[j] = dp[j] * (1.0L - p) + dp[j - 1] * p;
    dp[0] *= (1.0L - p);
  }
  long double tail = 0.0L;
  for (std::size_t j = n - k + 1; j <= n; ++j) tail += dp[j];
  return static_cast<double>(std::clamp(tail, 0.0L, 1.0L));
}

namespace {

// a strictly better than b among candidates that meet the target
bool better_feasible(const ResiliencePlan& a, const ResiliencePlan& b) {
  const auto lhs = static_cast<unsigned>(a.params.n) * b.params.k;
  const auto rhs = static_cast<unsigned>(b.params.n) * a.params.k;
  if (lhs != rhs) return lhs < rhs;
  if (a.params.tolerance() != b.params.tolerance()) return a.params.tolerance() > b.params.tolerance();
  return a.params.n < b.params.n;
}

bool better_fallback(const ResiliencePlan& a, const ResiliencePlan& b) {
  if (a.loss_probability != b.loss_probability) return a.loss_probability < b.loss_probability;
  return better_feasible(a, b);
}

}  // namespace

ResiliencePlan plan_resilience(std::span<const ContainerState> containers, std::uint64_t object_size, double target,
                               const UtilizationWeights& weights) {
  if (!(target > 0.0 && target < 1.0)) throw Error(Errc::InvalidParams, "target loss must lie in (0,1)");
  weights.validate();

  std::unordered_map<Uuid, double> rate_of;
  std::size_t healthy = 0;
  for (const auto& s : containers) {
    validate_state(s);
    rate_of[s.container_id] = s.annual_failure_rate;
    if (s.healthy) ++healthy;
  }
  const unsigned max_n = static_cast<unsigned>(std::min<std::size_t>(healthy, 255));

  std::optional<ResiliencePlan> best_ok;
  std::optional<ResiliencePlan> best_any;
  std::vector<double> rates;
  for (unsigned n = 1; n <= max_n; ++n) {
    for (unsigned k = 1; k <= n; ++k) {
      ResiliencePlan cand;
      cand.params = {static_cast<std::uint16_t>(n), static_cast<std::uint16_t>(k)};
      try {
        cand.targets = select_n_containers(containers, n, object_size, weights, k);
      } catch (const Error& e) {
        if (e.code() == Errc::NotEnoughContainers) continue;
        throw;
      }
      rates.clear();
      for (const auto& id : cand.targets) rates.push_back(rate_of.at(id));
      cand.loss_probability = loss_probability(rates, k);
      cand.feasible = cand.loss_probability <= target;
      if (cand.feasible && (!best_ok || better_feasible(cand, *best_ok))) best_ok = cand;
      if (!best_any || better_fallback(cand, *best_any)) best_any = cand;
    }
  }
  if (best_ok) return *best_ok;
  if (best_any) return *best_any;
  throw Error(Errc::NoFeasibleContainer, "no healthy container can hold a chunk of " + std::to_string(object_size) +
                                             " bytes");
}

}  // namespace dynostore::placement
