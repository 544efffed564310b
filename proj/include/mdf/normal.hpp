#pragma once

namespace mdf {

// Standard normal distribution.
double normal_cdf(double x);
// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);
double normal_pdf(double x);
// Inverse of normal_cdf on (0,1); returns -inf/+inf at 0/1.
double normal_quantile(double p);

}  // namespace mdf
