#pragma once

#include "shapefit/constrained.hpp"
#include "shapefit/design.hpp"
#include "shapefit/inflection.hpp"
#include "shapefit/smoother.hpp"

#include <string>
#include <vector>

namespace shapefit {

/// Oversmoothing factor for the first stage, natural logarithm:
/// iota(n) = log^2(n) n^{1/(2m+1) - 1/(2ell+3)}.
double iota_factor(int n, int ell, int m);

struct FirstStageOptions {
    std::vector<double> h_candidates;   // empty: automatic log grid
    double max_halfwidth = 0.24;        // clamp; pipeline needs h_n < 1/4
    bool clamp = true;                  // false: error instead of clamping
    int points_per_halfwidth = 8;
};

struct FirstStageResult {
    DerivativeCurve curve_ell;
    DerivativeCurve curve_ell_plus_1;
    double h_n = 0.0;
    double h_gcv = 0.0;
    double iota = 0.0;
    bool clamped = false;
    int ell = 0;
};

/// Oversmoothed kernel estimates of f^(ell) and f^(ell+1) at h_n = iota(n) h_GCV.
FirstStageResult first_stage(const SampleSet& samples, int ell, int m,
                             const FirstStageOptions& = {});

struct UncertaintyInterval {
    double center = 0.0;
    double sd = 0.0;
    double alpha = 0.0;
    double lo = 0.0, hi = 0.0;  // clipped to [0, 1]
};

std::vector<UncertaintyInterval> uncertainty_intervals(const FirstStageResult& first,
                                                       const SampleSet& samples, double alpha);

struct PlanRegion {
    double lo = 0.0, hi = 1.0;
    int derivative = 0;  // ell or ell+1
    int sign = +1;
    enum class Rule { outside, isolated, even, odd } rule = Rule::outside;
};

struct ConstraintPlan {
    int ell = 0;
    int k_hat = 0;
    std::vector<PlanRegion> regions;
    std::vector<std::string> notes;
};

/// Merges overlapping uncertainty intervals into clusters and assigns the
/// even/odd/isolated constraint rules.
ConstraintPlan resolve_overlaps(const std::vector<UncertaintyInterval>& intervals,
                                const DerivativeCurve& curve_ell,
                                const DerivativeCurve& curve_ell_plus_1);

struct SecondStageResult {
    ConstrainedFit fit;
    double lambda_gcv = 0.0;
    int final_crossings = 0;
    bool crossings_match = false;
};

SecondStageResult second_stage(const SampleSet& samples, const ConstraintPlan& plan, int m,
                               std::vector<double> lambda_candidates = {});

struct PilotResult {
    FirstStageResult first;
    std::vector<UncertaintyInterval> intervals;
    ConstraintPlan plan;
    SecondStageResult second;
    double sigma_used = 0.0;
};

PilotResult run_pilot(const SampleSet& samples, int ell, int m, double alpha,
                      const FirstStageOptions& = {});

}  // namespace shapefit
