#include "cisc/binomial.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace cisc {

namespace {

void validate(const BinomialSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("binomial: n must be >= 1");
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw std::invalid_argument("binomial: p must lie in [0, 1]");
  if (!(spec.w > 0.0) || !std::isfinite(spec.w)) throw std::invalid_argument("binomial: w must be a positive finite number");
}

// Credit for an outcome with k correct samples: 1 win, 0.5 tie, 0 loss.
double credit(int k, int n, double w) {
  double correct_mass = w * k;
  double incorrect_mass = static_cast<double>(n - k);
  double tol = 1e-9 * std::max(1.0, static_cast<double>(n));
  if (std::abs(correct_mass - incorrect_mass) <= tol) return 0.5;
  return correct_mass > incorrect_mass ? 1.0 : 0.0;
}

}  // namespace

double weighted_majority_accuracy(const BinomialSpec& spec) {
  validate(spec);
  const int n = spec.n;
  const double p = spec.p;
  if (p == 0.0) return credit(0, n, spec.w);
  if (p == 1.0) return credit(n, n, spec.w);

  // Anchor the log-pmf at the mode and walk outwards with the ratio
  // pmf(k+1)/pmf(k) = (n-k)/(k+1) * p/(1-p).
  const double log_odds = std::log(p) - std::log1p(-p);
  const int mode = std::min(n, static_cast<int>(std::floor((n + 1) * p)));
  const double log_mode = std::lgamma(n + 1.0) - std::lgamma(mode + 1.0) - std::lgamma(n - mode + 1.0) +
                          mode * std::log(p) + (n - mode) * std::log1p(-p);

  double total = 0.0;
  double log_pmf = log_mode;
  for (int k = mode; k <= n; ++k) {
    if (k > mode) log_pmf += std::log(static_cast<double>(n - k + 1) / k) + log_odds;
    total += std::exp(log_pmf) * credit(k, n, spec.w);
  }
  log_pmf = log_mode;
  for (int k = mode - 1; k >= 0; --k) {
    log_pmf -= std::log(static_cast<double>(n - k) / (k + 1)) + log_odds;
    total += std::exp(log_pmf) * credit(k, n, spec.w);
  }
  return std::clamp(total, 0.0, 1.0);
}

int min_samples_for_accuracy(double p, double w, double target) {
  validate({1, p, w});
  if (!(target < 1.0)) throw std::invalid_argument("min_samples_for_accuracy: target must be < 1");
  if (!(p * (1.0 + w) > 1.0))
    throw std::invalid_argument("min_samples_for_accuracy: unreachable target (requires p(1+w) > 1)");

  // Hoeffding: accuracy >= 1 - exp(-2 n delta^2), so this n always suffices.
  const double delta = p - 1.0 / (1.0 + w);
  const double bound = target <= 0.0 ? 1.0 : std::ceil(std::log(1.0 / (1.0 - target)) / (2.0 * delta * delta)) + 1.0;
  if (bound > 1e7) throw std::invalid_argument("min_samples_for_accuracy: required sample count exceeds 1e7");
  const int limit = static_cast<int>(bound);
  for (int n = 1; n <= limit; ++n)
    if (weighted_majority_accuracy({n, p, w}) >= target) return n;
  throw std::logic_error("min_samples_for_accuracy: concentration bound violated");
}

std::vector<CurvePoint> accuracy_curve(double p, double w, int n_max) {
  if (n_max < 1) throw std::invalid_argument("accuracy_curve: n_max must be >= 1");
  std::vector<CurvePoint> out;
  out.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) out.push_back({n, weighted_majority_accuracy({n, p, w})});
  return out;
}

void write_accuracy_curve_csv(std::ostream& out, double p, double w, int n_max) {
  auto unweighted = accuracy_curve(p, 1.0, n_max);
  auto weighted = accuracy_curve(p, w, n_max);
  out << "n,accuracy_w1,accuracy_w\n";
  for (int i = 0; i < n_max; ++i)
    out << fmt::format("{},{:.10f},{:.10f}\n", unweighted[i].n, unweighted[i].accuracy, weighted[i].accuracy);
}

}  // namespace cisc
