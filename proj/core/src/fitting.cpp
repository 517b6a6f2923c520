#include "iesim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "iesim/error.hpp"

namespace iesim {

namespace {

void require_samples(std::span<const double> samples, std::size_t n, const char* what) {
  if (samples.size() < n) throw FitError(fmt::format("{} needs at least {} samples, got {}", what, n, samples.size()));
  for (double x : samples)
    if (!std::isfinite(x)) throw FitError(fmt::format("{}: non-finite sample", what));
}

double mean_of(std::span<const double> s) {
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

double poisson_cdf(double x, double lambda) {
  if (x < 0) return 0.0;
  const auto k_max = static_cast<long long>(std::floor(x));
  double sum = 0.0;
  for (long long k = 0; k <= k_max; ++k) {
    const double kk = static_cast<double>(k);
    sum += std::exp(kk * std::log(lambda) - lambda - std::lgamma(kk + 1.0));
    if (kk > lambda && sum > 1.0 - 1e-15) break;
  }
  return std::min(1.0, sum);
}

double cdf(const Distribution& d, double x) {
  return std::visit(
      [x](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Dirac>) return x >= p.value ? 1.0 : 0.0;
        else if constexpr (std::is_same_v<T, Uniform>) return std::clamp((x - p.low) / (p.high - p.low), 0.0, 1.0);
        else if constexpr (std::is_same_v<T, Normal>) return 0.5 * std::erfc(-(x - p.mean) / (p.stddev * std::sqrt(2.0)));
        else if constexpr (std::is_same_v<T, Poisson>) return poisson_cdf(x / p.quantum, p.lambda);
        else return x <= 0 ? 0.0 : 1.0 - std::exp(-p.rate * x);
      },
      d.params());
}

}  // namespace

FitReport fit_poisson(std::span<const double> samples) {
  require_samples(samples, 2, "fit_poisson");
  for (double x : samples) {
    if (x < 0 || x != std::floor(x))
      throw FitError(fmt::format("fit_poisson: sample {} is not a non-negative integer", x));
  }
  const double lambda = mean_of(samples);
  if (lambda <= 0) throw FitError("fit_poisson: all samples are zero; use Dirac(0)");
  return FitReport{DistributionKind::Poisson, Distribution::poisson(lambda), samples.size(), 0.0, 0};
}

FitReport fit_normal(std::span<const double> samples) {
  require_samples(samples, 2, "fit_normal");
  const double mu = mean_of(samples);
  double ss = 0.0;
  for (double x : samples) ss += (x - mu) * (x - mu);
  const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  if (!(sd > 0)) throw FitError(fmt::format("fit_normal: degenerate data (all samples equal {}); use Dirac", mu));
  return FitReport{DistributionKind::Normal, Distribution::normal(mu, sd), samples.size(), 0.0, 0};
}

FitReport fit_exponential(std::span<const double> samples) {
  require_samples(samples, 2, "fit_exponential");
  for (double x : samples)
    if (x < 0) throw FitError(fmt::format("fit_exponential: negative sample {}", x));
  const double mu = mean_of(samples);
  if (!(mu > 0)) throw FitError("fit_exponential: sample mean is zero");
  return FitReport{DistributionKind::Exponential, Distribution::exponential(1.0 / mu), samples.size(), 0.0, 0};
}

FitReport fit(DistributionKind kind, std::span<const double> samples) {
  switch (kind) {
    case DistributionKind::Poisson: return fit_poisson(samples);
    case DistributionKind::Normal: return fit_normal(samples);
    case DistributionKind::Exponential: return fit_exponential(samples);
    default: break;
  }
  throw FitError(fmt::format("no estimator for {}", to_string(kind)));
}

ChiSquare chi_square_statistic(std::span<const double> samples, const Distribution& dist, int fitted_params) {
  if (samples.empty()) throw FitError("chi-square of an empty sample");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const auto n = samples.size();
  const auto bins = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  if (!(hi > lo)) throw FitError("chi-square: all samples are equal");

  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> observed(bins, 0);
  for (double x : samples) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    observed[std::min(b, bins - 1)]++;
  }
  // Outer bins absorb the tails so expected counts sum to n.
  double stat = 0.0;
  int used = 0;
  double prev = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    double upper_cdf = 1.0;
    if (b + 1 < bins) {
      const double edge = lo + width * static_cast<double>(b + 1);
      // Discrete kinds put mass exactly at integers; a value on the edge
      // belongs to the upper bin, so evaluate just below it.
      upper_cdf = cdf(dist, std::nextafter(edge, -std::numeric_limits<double>::infinity()));
    }
    const double expected = static_cast<double>(n) * (upper_cdf - prev);
    prev = upper_cdf;
    const auto obs = static_cast<double>(observed[b]);
    if (expected <= 0.0) {
      if (obs > 0) return ChiSquare{std::numeric_limits<double>::infinity(), 0};
      continue;
    }
    stat += (obs - expected) * (obs - expected) / expected;
    ++used;
  }
  return ChiSquare{stat, std::max(1, used - 1 - fitted_params)};
}

FitReport select_fit(std::span<const double> samples, std::span<const DistributionKind> candidates) {
  if (samples.size() < kMinSelectSamples)
    throw FitError(fmt::format("select_fit needs at least {} samples, got {}", kMinSelectSamples, samples.size()));
  if (candidates.empty()) throw FitError("select_fit: no candidate kinds");

  std::string log;
  FitReport best;
  bool found = false;
  for (auto kind : candidates) {
    try {
      FitReport r = fit(kind, samples);
      const int params = kind == DistributionKind::Normal ? 2 : 1;
      const ChiSquare cs = chi_square_statistic(samples, r.fitted, params);
      r.chi_square = cs.statistic;
      r.dof = cs.dof;
      log += fmt::format(" {}: chi2={:.4g} dof={};", to_string(kind), cs.statistic, cs.dof);
      if (std::isfinite(cs.statistic) && (!found || cs.statistic < best.chi_square)) {
        best = r;
        found = true;
      }
    } catch (const FitError& e) {
      log += fmt::format(" {}: rejected ({});", to_string(kind), e.what());
    }
  }
  if (!found) throw FitError("no candidate distribution fits:" + log);
  return best;
}

}  // namespace iesim
