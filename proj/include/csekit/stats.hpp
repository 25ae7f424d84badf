#pragma once

#include <span>
#include <vector>

namespace csekit {

/// Ranks starting at 1; tied values share the average of their positions.
std::vector<double> average_ranks(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation (Pearson over average ranks). Throws
/// ArgumentError on length mismatch or n < 2 and UndefinedCorrelationError
/// when either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace csekit
