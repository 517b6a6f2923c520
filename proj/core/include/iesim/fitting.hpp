#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "iesim/distribution.hpp"

namespace iesim {

struct FitReport {
  DistributionKind kind = DistributionKind::Normal;
  Distribution fitted;
  std::size_t samples = 0;
  // Chi-square over ceil(sqrt(n)) equal-width bins. Only filled by select_fit
  // and chi_square_statistic; the plain estimators leave it at zero.
  double chi_square = 0.0;
  int dof = 0;
};

// Maximum-likelihood Poisson rate; samples must be non-negative integers.
FitReport fit_poisson(std::span<const double> samples);
// Sample mean and unbiased standard deviation.
FitReport fit_normal(std::span<const double> samples);
// Rate = 1 / sample mean.
FitReport fit_exponential(std::span<const double> samples);

FitReport fit(DistributionKind kind, std::span<const double> samples);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
};
ChiSquare chi_square_statistic(std::span<const double> samples, const Distribution& dist, int fitted_params);

inline constexpr std::size_t kMinSelectSamples = 30;

// Fits every candidate and keeps the smallest chi-square statistic.
FitReport select_fit(std::span<const double> samples, std::span<const DistributionKind> candidates);

}  // namespace iesim
