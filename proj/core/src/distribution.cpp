#include "iesim/distribution.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "iesim/error.hpp"

namespace iesim {

namespace {

constexpr double kPoissonTableMaxLambda = 1e5;

bool finite(double x) { return std::isfinite(x); }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) noexcept {
  std::uint64_t z = root + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string_view to_string(DistributionKind kind) noexcept {
  switch (kind) {
    case DistributionKind::Dirac: return "dirac";
    case DistributionKind::Uniform: return "uniform";
    case DistributionKind::Normal: return "normal";
    case DistributionKind::Poisson: return "poisson";
    case DistributionKind::Exponential: return "exponential";
  }
  return "?";
}

DistributionKind parse_distribution_kind(std::string_view text) {
  const std::string s = lower(text);
  for (auto k : {DistributionKind::Dirac, DistributionKind::Uniform, DistributionKind::Normal,
                 DistributionKind::Poisson, DistributionKind::Exponential}) {
    if (s == to_string(k)) return k;
  }
  throw ValidationError("distribution", std::string(text), "dirac|uniform|normal|poisson|exponential");
}

Distribution::Distribution(Dirac d) : v_(d) { validate(); }
Distribution::Distribution(Uniform d) : v_(d) { validate(); }
Distribution::Distribution(Normal d) : v_(d) { validate(); }
Distribution::Distribution(Poisson d) : v_(d) {
  validate();
  if (d.lambda > kPoissonTableMaxLambda) return;
  // Terms are built around the mode in log space so large rates do not underflow.
  const auto mode = static_cast<long long>(d.lambda);
  const auto last = static_cast<long long>(d.lambda + 12.0 * std::sqrt(d.lambda) + 30.0);
  std::vector<double> pmf(static_cast<std::size_t>(last + 1));
  const double log_mode = static_cast<double>(mode) * std::log(d.lambda) - d.lambda - std::lgamma(mode + 1.0);
  pmf[mode] = std::exp(log_mode);
  for (long long k = mode + 1; k <= last; ++k) pmf[k] = pmf[k - 1] * d.lambda / static_cast<double>(k);
  for (long long k = mode; k > 0; --k) pmf[k - 1] = pmf[k] * static_cast<double>(k) / d.lambda;
  double acc = 0.0;
  for (auto& p : pmf) p = (acc += p);
  for (auto& p : pmf) p /= acc;
  pmf.back() = 1.0;
  poisson_cdf_ = std::make_shared<const std::vector<double>>(std::move(pmf));
}
Distribution::Distribution(Exponential d) : v_(d) { validate(); }

void Distribution::validate() const {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Dirac>) {
          if (!finite(d.value)) throw ValidationError("dirac.value", fmt::format("{}", d.value), "finite");
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (!finite(d.low) || !finite(d.high) || d.low >= d.high)
            throw ValidationError("uniform", fmt::format("[{}, {}]", d.low, d.high), "finite, low < high");
        } else if constexpr (std::is_same_v<T, Normal>) {
          if (!finite(d.mean) || !finite(d.stddev) || d.stddev <= 0)
            throw ValidationError("normal", fmt::format("mean={} sd={}", d.mean, d.stddev), "finite, sd > 0");
        } else if constexpr (std::is_same_v<T, Poisson>) {
          if (!finite(d.lambda) || d.lambda <= 0) throw ValidationError("poisson.lambda", fmt::format("{}", d.lambda), "> 0");
          if (!finite(d.quantum) || d.quantum <= 0)
            throw ValidationError("poisson.quantum", fmt::format("{}", d.quantum), "> 0");
        } else {
          if (!finite(d.rate) || d.rate <= 0) throw ValidationError("exponential.rate", fmt::format("{}", d.rate), "> 0");
        }
      },
      v_);
}

double Distribution::sample(Rng& rng) const {
  double x = std::visit(
      [this, &rng](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Dirac>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return std::uniform_real_distribution<double>(d.low, d.high)(rng);
        } else if constexpr (std::is_same_v<T, Normal>) {
          return std::normal_distribution<double>(d.mean, d.stddev)(rng);
        } else if constexpr (std::is_same_v<T, Poisson>) {
          if (!poisson_cdf_) return static_cast<double>(std::poisson_distribution<long long>(d.lambda)(rng)) * d.quantum;
          const auto& cdf = *poisson_cdf_;
          const double u = std::generate_canonical<double, 53>(rng);
          const auto k = std::upper_bound(cdf.begin(), cdf.end() - 1, u) - cdf.begin();
          return static_cast<double>(k) * d.quantum;
        } else {
          return std::exponential_distribution<double>(d.rate)(rng);
        }
      },
      v_);
  return std::max(0.0, x);
}

double Distribution::mean() const noexcept {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Dirac>) return d.value;
        else if constexpr (std::is_same_v<T, Uniform>) return 0.5 * (d.low + d.high);
        else if constexpr (std::is_same_v<T, Normal>) return d.mean;
        else if constexpr (std::is_same_v<T, Poisson>) return d.lambda * d.quantum;
        else return 1.0 / d.rate;
      },
      v_);
}

std::string Distribution::describe() const {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Dirac>) return fmt::format("Dirac({})", d.value);
        else if constexpr (std::is_same_v<T, Uniform>) return fmt::format("Uniform({}, {})", d.low, d.high);
        else if constexpr (std::is_same_v<T, Normal>) return fmt::format("Normal({}, {})", d.mean, d.stddev);
        else if constexpr (std::is_same_v<T, Poisson>) return fmt::format("Poisson({}, quantum={})", d.lambda, d.quantum);
        else return fmt::format("Exponential({})", d.rate);
      },
      v_);
}

bool operator==(const Distribution& a, const Distribution& b) {
  if (a.v_.index() != b.v_.index()) return false;
  return std::visit(
      [&b](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.v_);
        if constexpr (std::is_same_v<T, Dirac>) return x.value == y.value;
        else if constexpr (std::is_same_v<T, Uniform>) return x.low == y.low && x.high == y.high;
        else if constexpr (std::is_same_v<T, Normal>) return x.mean == y.mean && x.stddev == y.stddev;
        else if constexpr (std::is_same_v<T, Poisson>) return x.lambda == y.lambda && x.quantum == y.quantum;
        else return x.rate == y.rate;
      },
      a.v_);
}

}  // namespace iesim
