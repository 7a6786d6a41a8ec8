#include "shapefit/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"shapefit: shape-constrained nonparametric regression"};
    app.require_subcommand(1);
    shapefit::RunConfig cfg;

    auto* kernel = app.add_subcommand("kernel", "emit a sampled kernel table as CSV");
    kernel->add_option("--ell", cfg.ell, "derivative order of the extended kernel");
    kernel->add_option("--equivalent-m", cfg.equivalent_m,
                       "emit the spline-equivalent kernel of this order instead");
    kernel->add_option("--deriv-max", cfg.deriv_max, "highest derivative column");
    kernel->add_option("--grid-points", cfg.grid_points, "number of sample points");
    kernel->add_option("--output,-o", cfg.output_path, "output CSV path")->required();

    auto* fit = app.add_subcommand("fit", "fit a curve to CSV data (t,y[,sigma])");
    std::string halfwidth_arg, lambda_arg = "gcv";
    fit->add_option("--method", cfg.method, "kernel | spline | constrained")->required();
    fit->add_option("--input,-i", cfg.input_path, "input CSV")->required();
    fit->add_option("--output,-o", cfg.output_path, "curve CSV")->required();
    fit->add_option("--report", cfg.report_path, "JSON report path");
    fit->add_option("--ell", cfg.ell, "derivative order / cone order");
    fit->add_option("--m", cfg.m, "spline penalty order");
    fit->add_option("--halfwidth", halfwidth_arg, "kernel halfwidth or 'gcv'");
    fit->add_option("--lambda", lambda_arg, "smoothing parameter or 'gcv'");
    fit->add_option("--k", cfg.k, "number of change points");
    fit->add_option("--changepoints", cfg.changepoints, "change point locations")->delimiter(',');
    fit->add_flag("--search", cfg.search, "search change point locations");
    fit->add_option("--leading-sign", cfg.leading_sign, "+1 or -1 on the first region");
    fit->add_flag("--allow-boundary", cfg.allow_boundary, "flag boundary grid points instead of failing");
    fit->add_option("--grid-points", cfg.grid_points, "curve grid size (with --allow-boundary)");
    fit->add_option("--constraint-grid", cfg.constraint_grid_points, "constraint grid size");
    fit->add_option("--resolution", cfg.changepoint_resolution, "change point search resolution");
    fit->add_flag("--emit-plot-data", cfg.emit_plot_data, "write long-format plot CSV");
    fit->add_option("--plot-data", cfg.plot_data_path, "long-format CSV path");

    auto* pilot = app.add_subcommand("pilot", "two-stage constrained estimate");
    pilot->add_option("--input,-i", cfg.input_path, "input CSV")->required();
    pilot->add_option("--output,-o", cfg.output_path, "final curve CSV");
    pilot->add_option("--report", cfg.report_path, "JSON report path");
    pilot->add_option("--ell", cfg.ell, "convexity order")->required();
    pilot->add_option("--m", cfg.m, "spline penalty order");
    pilot->add_option("--alpha", cfg.alpha, "uncertainty interval level");
    pilot->add_flag("--emit-plot-data", cfg.emit_plot_data, "write long-format plot CSV");
    pilot->add_option("--plot-data", cfg.plot_data_path, "long-format CSV path");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo crossing-count study");
    sim->add_option("--scenario", cfg.scenario_path, "scenario JSON")->required();
    sim->add_option("--replicates", cfg.replicates, "number of replicates");
    sim->add_option("--seed", cfg.seed, "random seed");
    sim->add_option("--report", cfg.report_path, "JSON report path");
    sim->add_option("--crossings-csv", cfg.crossings_csv, "per-replicate crossing locations CSV");

    CLI11_PARSE(app, argc, argv);

    if (fit->parsed()) {
        cfg.command = "fit";
        try {
            if (halfwidth_arg == "gcv")
                cfg.halfwidth_gcv = true;
            else if (!halfwidth_arg.empty())
                cfg.halfwidth = std::stod(halfwidth_arg);
            if (lambda_arg == "gcv")
                cfg.lambda_gcv = true;
            else if (!lambda_arg.empty())
                cfg.lambda = std::stod(lambda_arg);
        } catch (const std::exception&) {
            std::fprintf(stderr, "error: --halfwidth/--lambda must be a number or 'gcv'\n");
            return 1;
        }
    } else if (kernel->parsed()) {
        cfg.command = "kernel";
    } else if (pilot->parsed()) {
        cfg.command = "pilot";
    } else if (sim->parsed()) {
        cfg.command = "simulate";
    }
    return shapefit::run(cfg);
}
