#include "sapt/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sapt {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mu, double sigma, double r_best, double xi) {
    const double gain = mu - r_best - xi;
    if (!(sigma > 0.0)) return std::max(0.0, gain);
    const double z = gain / sigma;
    return std::max(0.0, gain * normal_cdf(z) + sigma * normal_pdf(z));
}

double lcb(double mu_c, double sigma_c, double kappa) { return mu_c - kappa * sigma_c; }

double esi(const CellPrediction& p, double r_best, double safety_limit, double kappa, double xi) {
    if (lcb(p.safety.mean, p.safety.stddev(), kappa) < safety_limit) return 0.0;
    return expected_improvement(p.reward.mean, p.reward.stddev(), r_best, xi);
}

double violation_bound(double kappa) { return 0.5 + 0.5 * std::erf(-kappa / std::numbers::sqrt2); }

double probability_feasible(double mu_c, double sigma_c, double safety_limit) {
    if (!(sigma_c > 0.0)) return mu_c >= safety_limit ? 1.0 : 0.0;
    return normal_cdf((mu_c - safety_limit) / sigma_c);
}

}  // namespace sapt
