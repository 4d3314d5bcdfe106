#include "infpos/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "infpos/error.hpp"

namespace infpos {

double horizontal_error(double pred_x, double pred_y, double true_x, double true_y) {
  return std::hypot(pred_x - true_x, pred_y - true_y);
}

double percentile(const std::vector<double>& errors, double q) {
  if (errors.empty()) throw Error(Errc::data, "percentile: empty input");
  if (q < 0.0 || q > 1.0) throw Error(Errc::domain, "percentile: q must lie in [0,1]");
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<std::pair<double, double>> error_cdf(const std::vector<double>& errors) {
  if (errors.empty()) throw Error(Errc::data, "error_cdf: empty input");
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> cdf;
  cdf.reserve(sorted.size());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k)
    cdf.emplace_back(sorted[k], static_cast<double>(k + 1) / n);
  return cdf;
}

EvalReport make_report(const std::vector<double>& errors) {
  EvalReport r;
  r.errors = errors;
  r.cdf = error_cdf(errors);
  r.p50 = percentile(errors, 0.50);
  r.p67 = percentile(errors, 0.67);
  r.p80 = percentile(errors, 0.80);
  r.p90 = percentile(errors, 0.90);
  r.p95 = percentile(errors, 0.95);
  double sum = 0.0;
  for (double e : errors) sum += e;
  r.mean = sum / static_cast<double>(errors.size());
  r.count = errors.size();
  return r;
}

void write_report(const EvalReport& report, const std::string& csv_path,
                  const std::string& summary_path) {
  if (report.count == 0) throw Error(Errc::data, "write_report: empty report");
  std::ofstream csv(csv_path);
  if (!csv) throw Error(Errc::io, "write_report: cannot open " + csv_path);
  csv << "error_m,cdf\n";
  csv.precision(17);
  for (const auto& [e, f] : report.cdf) csv << e << ',' << f << '\n';
  if (!csv) throw Error(Errc::io, "write_report: write failed for " + csv_path);

  nlohmann::json summary{
      {"count", report.count}, {"p50", report.p50}, {"p67", report.p67},
      {"p80", report.p80},     {"p90", report.p90}, {"p95", report.p95},
      {"mean", report.mean},
  };
  std::ofstream js(summary_path);
  if (!js) throw Error(Errc::io, "write_report: cannot open " + summary_path);
  js << summary.dump(2) << '\n';
  if (!js) throw Error(Errc::io, "write_report: write failed for " + summary_path);
}

}  // namespace infpos
