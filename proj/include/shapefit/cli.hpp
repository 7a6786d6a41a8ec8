#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace shapefit {

/// Parsed command-line configuration; ranges are validated before any
/// numerical work starts.
struct RunConfig {
    std::string command;  // kernel | fit | pilot | simulate

    std::string input_path;
    std::string output_path;       // curve CSV
    std::string report_path;       // JSON report
    std::string scenario_path;     // simulate
    std::string crossings_csv;     // simulate, optional
    bool emit_plot_data = false;
    std::string plot_data_path;

    // kernel
    int ell = 0;
    int deriv_max = 2;
    int grid_points = 201;
    int equivalent_m = 0;  // nonzero: emit the spline-equivalent kernel

    // fit
    std::string method = "spline";  // kernel | spline | constrained
    double halfwidth = 0.0;
    bool halfwidth_gcv = false;
    double lambda = 0.0;
    bool lambda_gcv = false;
    int m = 2;
    int k = 0;
    std::vector<double> changepoints;
    bool search = false;
    int leading_sign = +1;
    bool allow_boundary = false;
    int constraint_grid_points = 0;
    int changepoint_resolution = 41;

    // pilot / simulate
    double alpha = 0.05;
    std::uint64_t seed = 42;
    int replicates = 200;
};

/// Dispatches the command; returns the process exit code
/// (0 success, 1 input error, 2 numerical failure).
int run(const RunConfig& config);

/// Deterministic JSON report of a simulate run (the bytes `run` writes).
std::string simulate_report_json(const RunConfig& config);

/// Deterministic JSON report of a pilot run on the given input file.
std::string pilot_report_json(const RunConfig& config);

}  // namespace shapefit
