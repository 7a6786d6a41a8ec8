#include "shapefit/design.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shapefit {

namespace {

void validate_points(const std::vector<double>& pts) {
    if (pts.empty()) throw std::invalid_argument("design: needs at least one point");
    double prev = -1.0;
    for (double t : pts) {
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("design: points must lie in [0,1]");
        if (t < prev) throw std::invalid_argument("design: points must be sorted ascending");
        prev = t;
    }
}

void validate_cdf(const DesignInfo& d) {
    if (std::abs(d.limit_cdf(0.0)) > 1e-9 || std::abs(d.limit_cdf(1.0) - 1.0) > 1e-9)
        throw std::invalid_argument("design: limit cdf must satisfy F(0)=0, F(1)=1");
    for (int i = 0; i <= 16; ++i) {
        const double t = i / 16.0;
        if (!(d.density(t) > 0.0))
            throw std::invalid_argument("design: limit density must be positive on [0,1]");
    }
}

}  // namespace

DesignInfo DesignInfo::uniform(std::vector<double> pts) {
    validate_points(pts);
    DesignInfo d;
    d.points = std::move(pts);
    d.limit_cdf = [](double t) { return t; };
    d.density = [](double) { return 1.0; };
    return d;
}

DesignInfo DesignInfo::with_cdf(std::vector<double> pts, std::function<double(double)> cdf,
                                std::function<double(double)> dens) {
    validate_points(pts);
    DesignInfo d;
    d.points = std::move(pts);
    d.limit_cdf = std::move(cdf);
    d.density = std::move(dens);
    validate_cdf(d);
    return d;
}

std::vector<double> midpoint_design(int n) {
    std::vector<double> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = (i + 0.5) / n;
    return pts;
}

double empirical_discrepancy(const DesignInfo& design) {
    const int n = design.size();
    double sup = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = design.limit_cdf(design.points[i]);
        sup = std::max(sup, std::abs((i + 1.0) / n - f));  // right limit at the jump
        sup = std::max(sup, std::abs(static_cast<double>(i) / n - f));  // left limit
    }
    return sup;
}

double design_density(const DesignInfo& design, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("design_density: t outside [0,1]");
    return design.density(t);
}

SampleSet make_samples(DesignInfo design, std::vector<double> y, std::vector<double> sigma) {
    if (y.size() != design.points.size())
        throw std::invalid_argument("samples: y length must match the design");
    if (sigma.size() != y.size())
        throw std::invalid_argument("samples: sigma length must match the design");
    for (double s : sigma)
        if (!(s > 0.0)) throw std::invalid_argument("samples: all sigma_i must be positive");
    SampleSet out;
    out.design = std::move(design);
    out.y = std::move(y);
    out.sigma = std::move(sigma);
    return out;
}

SampleSet make_samples(DesignInfo design, std::vector<double> y, double sigma) {
    const std::size_t n = design.points.size();
    return make_samples(std::move(design), std::move(y), std::vector<double>(n, sigma));
}

double rice_sigma(const SampleSet& samples) {
    const int n = samples.size();
    if (n < 2) throw std::invalid_argument("rice_sigma: needs n >= 2");
    double s = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        const double d = samples.y[i + 1] - samples.y[i];
        s += d * d;
    }
    return std::sqrt(s / (2.0 * (n - 1)));
}

double sigma_scale(const SampleSet& samples) {
    double s = 0.0;
    for (double v : samples.sigma) s += v * v;
    return std::sqrt(s / samples.size());
}

}  // namespace shapefit
