#include "dpplab/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "dpplab/errors.hpp"

namespace dpplab {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw ValidationError("mean of empty vector");
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) throw ValidationError("variance needs >= 2 values");
  double m = mean(xs);
  KahanSum s;
  for (double x : xs) s.add((x - m) * (x - m));
  return s.value() / static_cast<double>(xs.size() - 1);
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw ValidationError("median of empty vector");
  std::sort(xs.begin(), xs.end());
  std::size_t m = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("fit_line needs matching vectors of size >= 2");
  }
  double n = static_cast<double>(x.size());
  double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("fit_line: degenerate x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = syy - f.slope * sxy;
  if (ss_res < 0.0) ss_res = 0.0;  // roundoff guard
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (x.size() > 2) {
    f.slope_stderr = std::sqrt(ss_res / (n - 2.0) / sxx);
  }
  return f;
}

double chi_square_pvalue(double stat, double dof) {
  if (dof <= 0.0) throw ValidationError("chi-square dof must be positive");
  if (stat <= 0.0) return 1.0;
  // P[Chi2_k >= x] = Q(k/2, x/2)
  return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& observed,
                               const std::vector<double>& expected_probs,
                               std::int64_t n_total) {
  if (observed.size() != expected_probs.size() || observed.empty()) {
    throw ValidationError("chi_square_gof: mismatched inputs");
  }
  double nd = static_cast<double>(n_total);
  ChiSquareResult r;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  int kept = 0;
  KahanSum stat;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double e = nd * expected_probs[i];
    if (e < 5.0) {
      pooled_obs += static_cast<double>(observed[i]);
      pooled_exp += e;
      ++r.pooled_bins;
      continue;
    }
    double d = static_cast<double>(observed[i]) - e;
    stat.add(d * d / e);
    ++kept;
  }
  if (pooled_exp > 0.0) {
    double d = pooled_obs - pooled_exp;
    stat.add(d * d / pooled_exp);
    ++kept;
  }
  if (kept < 2) throw ValidationError("chi_square_gof: fewer than 2 cells");
  r.statistic = stat.value();
  r.dof = static_cast<double>(kept - 1);
  r.p_value = chi_square_pvalue(r.statistic, r.dof);
  return r;
}

}  // namespace dpplab
