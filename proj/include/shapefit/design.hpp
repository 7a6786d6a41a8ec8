#pragma once

#include <functional>
#include <vector>

namespace shapefit {

/// Deterministic design on [0, 1] together with its declared limiting
/// distribution F (uniform unless stated otherwise).
struct DesignInfo {
    std::vector<double> points;                  // sorted ascending, in [0, 1]
    std::function<double(double)> limit_cdf;     // F, F(0)=0, F(1)=1
    std::function<double(double)> density;       // F' > 0 on [0, 1]

    static DesignInfo uniform(std::vector<double> pts);
    static DesignInfo with_cdf(std::vector<double> pts,
                               std::function<double(double)> cdf,
                               std::function<double(double)> dens);
    int size() const { return static_cast<int>(points.size()); }
};

/// Regular midpoint design t_i = (i - 1/2)/n.
std::vector<double> midpoint_design(int n);

/// Two-sided sup distance between the empirical distribution of the design
/// points and the declared limit distribution.
double empirical_discrepancy(const DesignInfo& design);

/// F'(t) from the declared limit distribution.
double design_density(const DesignInfo& design, double t);

struct SampleSet {
    DesignInfo design;
    std::vector<double> y;
    std::vector<double> sigma;       // per-point noise sd, all > 0
    bool sigma_from_data = false;    // true when sigma was estimated

    int size() const { return static_cast<int>(y.size()); }
};

SampleSet make_samples(DesignInfo design, std::vector<double> y, std::vector<double> sigma);
SampleSet make_samples(DesignInfo design, std::vector<double> y, double sigma);

/// First-difference noise scale estimate (returns the sd).
double rice_sigma(const SampleSet& samples);

/// Scalar noise scale: sqrt of the mean sigma_i^2.
double sigma_scale(const SampleSet& samples);

}  // namespace shapefit
