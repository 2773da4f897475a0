#pragma once

namespace mabprune {

double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b), evaluated with Lentz's continued
/// fraction to 1e-12 relative convergence.
double regularized_incomplete_beta(double a, double b, double x);

/// Quantile of Beta(a, b) at probability level p, by bisection on the CDF.
double beta_quantile(double a, double b, double p, double tol = 1e-8);

/// KL divergence between Bernoulli(p) and Bernoulli(q); 0·log 0 := 0,
/// +inf when q puts zero mass where p does not.
double bernoulli_kl(double p, double q);

} // namespace mabprune
