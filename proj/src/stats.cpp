#include "bcap/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "bcap/error.hpp"

namespace bcap {

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t h = xs.size() / 2;
  return pairwise_sum(xs.first(h)) + pairwise_sum(xs.subspan(h));
}

McEstimate summarize(std::span<const double> xs) {
  McEstimate e;
  e.samples = static_cast<std::int64_t>(xs.size());
  if (xs.empty()) return e;
  const double n = static_cast<double>(xs.size());
  e.mean = pairwise_sum(xs) / n;
  if (xs.size() > 1) {
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - e.mean) * (xs[i] - e.mean);
    e.variance = pairwise_sum(sq) / (n - 1);
    e.stderr = std::sqrt(e.variance / n);
  }
  return e;
}

double covariance(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ConfigError("covariance: length mismatch");
  if (xs.size() < 2) return 0;
  const double n = static_cast<double>(xs.size());
  const double mx = pairwise_sum(xs) / n, my = pairwise_sum(ys) / n;
  std::vector<double> p(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) p[i] = (xs[i] - mx) * (ys[i] - my);
  return pairwise_sum(p) / (n - 1);
}

McEstimate sum_independent(std::span<const McEstimate> parts) {
  McEstimate e;
  double var = 0;
  for (const auto& p : parts) {
    e.mean += p.mean;
    var += p.stderr * p.stderr;
    e.samples += p.samples;
    e.bias_bound += p.bias_bound;
  }
  e.stderr = std::sqrt(var);
  return e;
}

void parallel_for(std::int64_t count, int workers, const std::function<void(std::int64_t)>& body) {
  if (count <= 0) return;
  workers = std::max(1, std::min<int>(workers, static_cast<int>(std::min<std::int64_t>(count, 1024))));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    while (true) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  std::vector<double> ones(x.size(), 1.0);
  LineFit f = fit_line_weighted(x, y, ones);
  // Unit weights carry no noise scale; use the residual variance.
  f.slope_stderr = x.size() > 2 ? f.slope_stderr * std::sqrt(f.rss / static_cast<double>(x.size() - 2)) : 0.0;
  return f;
}

LineFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma) {
  if (x.size() != y.size() || x.size() != sigma.size()) throw ConfigError("fit_line: length mismatch");
  if (x.size() < 2) throw ConfigError("fit_line: need at least two points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(sigma[i] > 0)) throw ConfigError("fit_line: nonpositive sigma");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sxx += w * (x[i] - mx) * (x[i] - mx);
    sxy += w * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw ConfigError("fit_line: degenerate design (all x equal)");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.rss += r * r / (sigma[i] * sigma[i]);
  }
  f.slope_stderr = std::sqrt(1.0 / sxx);
  return f;
}

}  // namespace bcap
