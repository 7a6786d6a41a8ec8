#pragma once

#include "shapefit/design.hpp"
#include "shapefit/kernels.hpp"
#include "shapefit/smoother.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace shapefit {

struct InflectionReport {
    int crossing_count = 0;
    std::vector<double> crossing_locations;
    double predicted_excess = 0.0;
    std::vector<double> per_point_z;
};

/// Strict sign changes of the curve after clamping |v| < tol to zero;
/// a +,0,...,0,- run counts once, located by linear interpolation.
/// tol < 0 uses the default 1e-3 * max|values|.
InflectionReport count_sign_changes(const DerivativeCurve& curve, double tol = -1.0);
InflectionReport count_sign_changes(const std::vector<double>& grid,
                                    const std::vector<double>& values, double tol = -1.0);

/// H(z) = phi(z)/z + Phi(z) - 1 for z > 0.
double h_function(double z);

struct TrueInflection {
    double location = 0.0;
    double slope = 0.0;  // f^(ell+1) at the inflection point
};

/// Expected number of extra sign changes of the kernel estimate:
/// 2 sum_j H(z_j). literal_norm evaluates the unsquared-norm variant of z.
double expected_false_inflections(const std::vector<TrueInflection>& inflections, int n, double h,
                                  double sigma, const KernelSpec& kernel, const DesignInfo& design,
                                  bool literal_norm = false);

/// Gaussian-process crossing statistics on [a, b]; mean_deriv may be empty,
/// in which case it is differenced numerically.
struct ProcessStats {
    std::function<double(double)> mean;
    std::function<double(double)> sd;
    std::function<double(double)> deriv_sd;
    std::function<double(double)> corr;
    double a = 0.0, b = 1.0;
    std::function<double(double)> mean_deriv;
};

/// Expected zero-crossing count of the process by adaptive quadrature of the
/// local crossing rate.
double cramer_leadbetter_count(const ProcessStats& stats);

struct Scenario {
    std::function<double(double, int)> f;  // value and derivatives
    int n = 0;
    double sigma = 1.0;
    int ell = 0;
    enum class Method { kernel, spline } method = Method::kernel;
    double halfwidth = 0.0;  // kernel method
    double lambda = 0.0;     // spline method
    int m = 2;               // spline method
    double a = 0.0, b = 1.0; // counting interval
    int points_per_halfwidth = 8;
    double tol_factor = 1e-3;    // crossing clamp, relative to max|curve|
    bool literal_norm = false;   // Eq. 4.2 variant toggle
};

struct McInflectionResult {
    double mean_count = 0.0;
    double se = 0.0;
    double predicted = 0.0;        // K + expected excess
    double expected_excess = 0.0;
    int k_true = 0;
    std::vector<int> counts;       // per replicate
    std::vector<std::vector<double>> locations;  // per-replicate crossing locations
    std::vector<double> z_values;
    std::vector<std::string> warnings;
    double d_n = 0.0;
    bool d_n_ok = false;           // d_n < n^{-1/2}
};

McInflectionResult monte_carlo_inflections(const Scenario& scenario, int replicates,
                                           std::uint64_t seed);

struct LocalizationResult {
    double fraction = 0.0;  // replicates with a crossing farther than delta from truth
    int replicates = 0;
    int flagged = 0;
};

LocalizationResult false_inflection_localization(const Scenario& scenario, int replicates,
                                                 double delta, std::uint64_t seed);

/// Sign-change locations of t -> f(t, deriv) inside [a, b], by scan+bisection.
std::vector<double> analytic_crossings(const std::function<double(double, int)>& f, int deriv,
                                       double a, double b);

}  // namespace shapefit
