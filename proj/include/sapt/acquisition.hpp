#pragma once

#include "sapt/gp.hpp"

namespace sapt {

double normal_pdf(double z);
double normal_cdf(double z);

/// Closed-form EI for a Gaussian belief N(mu, sigma^2) over the incumbent
/// r_best + xi. Reduces to max(0, mu - r_best - xi) when sigma == 0.
double expected_improvement(double mu, double sigma, double r_best, double xi);

/// Pessimistic safety estimate mu_c - kappa * sigma_c.
double lcb(double mu_c, double sigma_c, double kappa);

/// Reward and safety beliefs at one repertoire cell.
struct CellPrediction {
    Prediction reward;
    Prediction safety;
};

/// EI gated by the safety LCB: 0 if lcb < limit, EI otherwise (lcb == limit is safe).
double esi(const CellPrediction& p, double r_best, double safety_limit, double kappa, double xi);

/// Upper bound on Pr(c < limit) for any cell admitted by the LCB gate:
/// 1/2 + 1/2 erf(-kappa / sqrt 2), i.e. Phi(-kappa).
double violation_bound(double kappa);

/// Pr(c >= limit) under N(mu_c, sigma_c^2); a step function when sigma_c == 0.
double probability_feasible(double mu_c, double sigma_c, double safety_limit);

}  // namespace sapt
