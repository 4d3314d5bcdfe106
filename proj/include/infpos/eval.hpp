#pragma once

#include <string>
#include <utility>
#include <vector>

namespace infpos {

struct EvalReport {
  std::vector<double> errors;                       // per-sample, meters
  std::vector<std::pair<double, double>> cdf;       // (error, cumulative fraction)
  double p50 = 0, p67 = 0, p80 = 0, p90 = 0, p95 = 0;
  double mean = 0;
  std::size_t count = 0;
};

double horizontal_error(double pred_x, double pred_y, double true_x, double true_y);

// Linear interpolation between order statistics at positions (i-1)/(n-1);
// q=0 gives the minimum, q=1 the maximum.
double percentile(const std::vector<double>& errors, double q);

// Sorted errors paired with fractions k/n (step CDF, ends at 1.0).
std::vector<std::pair<double, double>> error_cdf(const std::vector<double>& errors);

EvalReport make_report(const std::vector<double>& errors);

// CSV with header "error_m,cdf" plus a JSON summary
// {count, p50, p67, p80, p90, p95, mean}.
void write_report(const EvalReport& report, const std::string& csv_path,
                  const std::string& summary_path);

}  // namespace infpos
