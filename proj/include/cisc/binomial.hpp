#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

namespace cisc {

/// Binary-answer voting model: n samples, each correct with probability p,
/// correct samples weighted w relative to incorrect ones.
struct BinomialSpec {
  int n = 1;
  double p = 0.5;
  double w = 1.0;
};

/// P(wX > n - X) + 0.5 * P(wX = n - X) for X ~ Binomial(n, p).
/// Throws std::invalid_argument for an invalid spec.
double weighted_majority_accuracy(const BinomialSpec& spec);

/// Smallest n whose weighted-majority accuracy reaches `target`.
/// Throws std::invalid_argument when the target is unreachable (p(1+w) <= 1
/// or target >= 1).
int min_samples_for_accuracy(double p, double w, double target);

struct CurvePoint {
  int n = 0;
  double accuracy = 0.0;
};

std::vector<CurvePoint> accuracy_curve(double p, double w, int n_max);

/// CSV with columns n, accuracy_w1, accuracy_w.
void write_accuracy_curve_csv(std::ostream& out, double p, double w, int n_max);

}  // namespace cisc
