#pragma once

#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iesim/rng.hpp"

namespace iesim {

enum class DistributionKind { Dirac, Uniform, Normal, Poisson, Exponential };

std::string_view to_string(DistributionKind kind) noexcept;
DistributionKind parse_distribution_kind(std::string_view text);

struct Dirac {
  double value = 0.0;
};
struct Uniform {
  double low = 0.0;
  double high = 0.0;
};
// Samples are clamped at zero because every use is a duration.
struct Normal {
  double mean = 0.0;
  double stddev = 0.0;
};
// Count model; a duration is count * quantum.
struct Poisson {
  double lambda = 0.0;
  double quantum = 1.0;
};
struct Exponential {
  double rate = 1.0;
};

class Distribution {
 public:
  using Variant = std::variant<Dirac, Uniform, Normal, Poisson, Exponential>;

  Distribution() : v_(Dirac{0.0}) {}
  Distribution(Dirac d);
  Distribution(Uniform d);
  Distribution(Normal d);
  Distribution(Poisson d);
  Distribution(Exponential d);

  static Distribution dirac(double value) { return Dirac{value}; }
  static Distribution uniform(double low, double high) { return Uniform{low, high}; }
  static Distribution normal(double mean, double stddev) { return Normal{mean, stddev}; }
  static Distribution poisson(double lambda, double quantum = 1.0) { return Poisson{lambda, quantum}; }
  static Distribution exponential(double rate) { return Exponential{rate}; }

  DistributionKind kind() const noexcept { return static_cast<DistributionKind>(v_.index()); }
  const Variant& params() const noexcept { return v_; }

  double sample(Rng& rng) const;
  // Nominal mean (before clamping at zero).
  double mean() const noexcept;
  std::string describe() const;

  friend bool operator==(const Distribution& a, const Distribution& b);

 private:
  void validate() const;
  Variant v_;
  // Poisson counts are drawn by inverse transform over a cumulative table
  // built once; very large rates fall back to the library sampler.
  std::shared_ptr<const std::vector<double>> poisson_cdf_;
};

}  // namespace iesim
