#pragma once

#include <span>

namespace sapt::stats {

double mean(std::span<const double> xs);
/// Population standard deviation (divides by n).
double stddev(std::span<const double> xs);
/// Linear interpolation between closest ranks; q in [0, 1].
double quantile(std::span<const double> xs, double q);
double median(std::span<const double> xs);

}  // namespace sapt::stats
