#pragma once

namespace shapefit {

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse of normal_cdf, full double precision.
double normal_quantile(double p);
/// Two-sided alpha quantile: z with P(|Z| <= z) = 1 - alpha.
double two_sided_z(double alpha);

}  // namespace shapefit
