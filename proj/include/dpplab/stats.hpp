#pragma once

#include <cstdint>
#include <vector>

namespace dpplab {

// Kahan-compensated accumulator; keeps 2^N-term sums order-insensitive.
class KahanSum {
 public:
  void add(double x) {
    double y = x - comp_;
    double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);  // divisor n-1
double median(std::vector<double> xs);                  // copies and sorts

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
};

// Ordinary least squares of y on x; needs >= 3 points for a stderr.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Upper tail P[Chi2_dof >= stat].
double chi_square_pvalue(double stat, double dof);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  int pooled_bins = 0;  // bins merged into the slack cell (expected count < 5)
};

// Goodness of fit of observed counts against expected probabilities given
// n_total draws. Bins with expected count below 5 are pooled into one cell.
ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& observed,
                               const std::vector<double>& expected_probs,
                               std::int64_t n_total);

}  // namespace dpplab
