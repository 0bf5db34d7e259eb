#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "popaudit/evaluation.hpp"

namespace popaudit {

namespace {

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

// Two-pass mean / sample variance.
Moments moments(std::span<const double> x) {
  Moments m;
  m.n = static_cast<double>(x.size());
  double sum = 0.0;
  for (double v : x) sum += v;
  m.mean = sum / m.n;
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.variance = ss / (m.n - 1.0);
  return m;
}

}  // namespace

std::optional<TTestResult> welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    return std::nullopt;
  }
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double va = ma.variance / ma.n;
  const double vb = mb.variance / mb.n;
  const double se2 = va + vb;
  if (!(se2 > 0.0)) {
    return std::nullopt;
  }

  TTestResult result;
  result.t = (ma.mean - mb.mean) / std::sqrt(se2);
  // Welch-Satterthwaite.
  result.df = se2 * se2 / (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
  const boost::math::students_t dist(result.df);
  result.p_value = 2.0 * boost::math::cdf(dist, -std::fabs(result.t));
  if (result.p_value > 1.0) result.p_value = 1.0;
  return result;
}

bool fold_consistent_significance(std::span<const std::optional<TTestResult>> per_fold, double alpha) {
  if (per_fold.empty()) {
    return false;
  }
  for (const auto& test : per_fold) {
    if (!test || !(test->p_value < alpha)) {
      return false;
    }
  }
  return true;
}

}  // namespace popaudit
