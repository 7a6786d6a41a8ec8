#include "shapefit/cli.hpp"

#include "shapefit/csv.hpp"
#include "shapefit/constrained.hpp"
#include "shapefit/inflection.hpp"
#include "shapefit/kernels.hpp"
#include "shapefit/pilot.hpp"
#include "shapefit/smoother.hpp"
#include "shapefit/spline.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <stdexcept>

namespace shapefit {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file " + path);
    out << text;
}

std::vector<double> uniform_grid(double a, double b, int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = a + (b - a) * i / (count - 1);
    return g;
}

std::vector<double> default_h_candidates(const SampleSet& samples) {
    double max_gap = 0.0;
    const auto& pts = samples.design.points;
    for (std::size_t i = 1; i < pts.size(); ++i)
        max_gap = std::max(max_gap, pts[i] - pts[i - 1]);
    return log_spaced(std::max(4.0 * max_gap, 1e-3), 0.25, 25);
}

std::function<double(double, int)> make_function(const json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "sin") {
        const double amplitude = spec.value("amplitude", 1.0);
        const double cycles = spec.value("cycles", 1.0);
        const double phase = spec.value("phase", 0.0);
        const double omega = 2.0 * std::numbers::pi * cycles;
        return [=](double t, int d) {
            return amplitude * std::pow(omega, d) * std::sin(omega * t + phase + d * std::numbers::pi / 2.0);
        };
    }
    if (kind == "poly") {
        const std::vector<double> coeffs = spec.at("coeffs").get<std::vector<double>>();
        return [coeffs](double t, int d) {
            double v = 0.0;
            for (std::size_t i = coeffs.size(); i-- > 0;) {
                if (static_cast<int>(i) < d) break;
                double c = coeffs[i];
                for (int r = 0; r < d; ++r) c *= static_cast<double>(i - r);
                v = v * t + c;
            }
            return v;
        };
    }
    throw std::invalid_argument("scenario: unknown function kind '" + kind + "'");
}

Scenario load_scenario(const std::string& path, json& echo) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::invalid_argument("scenario parse error: " + std::string(e.what()));
    }
    Scenario sc;
    sc.f = make_function(doc.at("function"));
    sc.n = doc.at("n").get<int>();
    sc.sigma = doc.at("sigma").get<double>();
    sc.ell = doc.at("ell").get<int>();
    const std::string method = doc.value("method", "kernel");
    if (method == "kernel") {
        sc.method = Scenario::Method::kernel;
        sc.halfwidth = doc.at("halfwidth").get<double>();
    } else if (method == "spline") {
        sc.method = Scenario::Method::spline;
        sc.lambda = doc.at("lambda").get<double>();
        sc.m = doc.value("m", 2);
    } else {
        throw std::invalid_argument("scenario: method must be kernel or spline");
    }
    if (doc.contains("interval")) {
        sc.a = doc["interval"].at(0).get<double>();
        sc.b = doc["interval"].at(1).get<double>();
    }
    sc.points_per_halfwidth = doc.value("points_per_halfwidth", 8);
    sc.tol_factor = doc.value("tol_factor", 1e-3);
    sc.literal_norm = doc.value("literal_norm", false);
    echo = std::move(doc);
    return sc;
}

int run_kernel(const RunConfig& cfg) {
    if (cfg.output_path.empty()) throw std::invalid_argument("kernel: needs --output");
    KernelSpec spec;
    double lo, hi;
    if (cfg.equivalent_m > 0) {
        spec = equivalent_spline_kernel(cfg.equivalent_m);
        lo = -6.0;
        hi = 6.0;
    } else {
        spec = build_extended_kernel(cfg.ell);
        lo = -1.0;
        hi = 1.0;
    }
    std::ofstream out(cfg.output_path);
    if (!out) throw std::invalid_argument("cannot open output file " + cfg.output_path);
    out.precision(17);
    out << "s";
    for (int d = 0; d <= cfg.deriv_max; ++d) out << ",k" << d;
    out << '\n';
    for (double s : uniform_grid(lo, hi, cfg.grid_points)) {
        out << s;
        for (int d = 0; d <= cfg.deriv_max; ++d) out << ',' << evaluate_kernel(spec, s, d);
        out << '\n';
    }
    return 0;
}

json fit_common_report(const RunConfig& cfg) {
    json rep;
    rep["schema_version"] = kSchemaVersion;
    rep["command"] = "fit";
    rep["method"] = cfg.method;
    return rep;
}

int run_fit(const RunConfig& cfg) {
    if (cfg.input_path.empty()) throw std::invalid_argument("fit: needs --input");
    if (cfg.output_path.empty()) throw std::invalid_argument("fit: needs --output");
    SampleSet samples = ingest_csv(cfg.input_path);
    if (samples.size() < 2 * cfg.m)
        throw std::invalid_argument("fit: needs at least 2m data points");
    json rep = fit_common_report(cfg);
    rep["n"] = samples.size();
    rep["sigma_estimated"] = samples.sigma_from_data;
    rep["d_n"] = empirical_discrepancy(samples.design);

    std::vector<double> grid, values;
    std::optional<std::vector<double>> sd;

    if (cfg.method == "kernel") {
        const KernelSpec kernel = build_extended_kernel(cfg.ell);
        double h = cfg.halfwidth;
        if (cfg.halfwidth_gcv) {
            h = gcv_bandwidth(samples, build_extended_kernel(0), default_h_candidates(samples));
            rep["halfwidth_gcv"] = true;
        }
        if (!(h > 0.0)) throw std::invalid_argument("fit: needs --halfwidth or gcv");
        if (cfg.allow_boundary) {
            grid = uniform_grid(0.0, 1.0, std::max(2, cfg.grid_points));
        } else {
            if (h >= 0.5) throw std::invalid_argument("fit: halfwidth leaves no interior");
            grid = halfwidth_grid(h, 1.0 - h, h, 8);
        }
        GmOptions opts;
        opts.allow_boundary = cfg.allow_boundary;
        auto curve = gm_estimate(samples, kernel, h, grid, cfg.ell, opts);
        values = curve.values;
        sd = asymptotic_sd_curve(samples, kernel, h, grid);
        rep["ell"] = cfg.ell;
        rep["halfwidth"] = h;
    } else if (cfg.method == "spline") {
        double lambda = cfg.lambda;
        if (cfg.lambda_gcv) {
            lambda = gcv_lambda(samples, cfg.m, log_spaced(1e-8, 1.0, 25));
            rep["lambda_gcv"] = true;
        }
        if (!(lambda > 0.0)) throw std::invalid_argument("fit: needs --lambda or gcv");
        auto model = fit_spline(samples, cfg.m, lambda);
        grid = uniform_grid(0.0, 1.0, 401);
        values = model.evaluate_grid(grid, 0);
        rep["m"] = cfg.m;
        rep["lambda"] = lambda;
        rep["hat_trace"] = model.hat_trace();
        rep["objective"] = model.objective();
        const double denom = samples.size() - model.hat_trace();
        double rss = 0.0;
        for (int i = 0; i < samples.size(); ++i) {
            const double r = samples.y[i] - model.evaluate(samples.design.points[i]);
            rss += r * r;
        }
        rep["gcv_score"] = samples.size() * rss / (denom * denom);
    } else if (cfg.method == "constrained") {
        double lambda = cfg.lambda;
        if (cfg.lambda_gcv) {
            lambda = gcv_lambda(samples, cfg.m, log_spaced(1e-8, 1.0, 25));
            rep["lambda_gcv"] = true;
        }
        if (!(lambda > 0.0)) throw std::invalid_argument("fit: needs --lambda or gcv");
        ConstrainOptions copts;
        copts.grid_points = cfg.constraint_grid_points;
        ConstrainedFit fit;
        ConePartition partition;
        partition.ell = cfg.ell;
        partition.leading_sign = cfg.leading_sign;
        if (cfg.search) {
            auto [part, best] = optimize_changepoints(samples, cfg.m, lambda, cfg.ell, cfg.k,
                                                      cfg.changepoint_resolution, copts);
            partition = part;
            fit = std::move(best);
        } else {
            partition.change_points = cfg.changepoints;
            if (static_cast<int>(partition.change_points.size()) != cfg.k)
                throw std::invalid_argument("fit: --changepoints must list k locations");
            fit = fit_constrained(samples, cfg.m, lambda, partition, copts);
        }
        grid = uniform_grid(0.0, 1.0, 401);
        values = fit.model.evaluate_grid(grid, 0);
        rep["m"] = cfg.m;
        rep["lambda"] = lambda;
        rep["ell"] = cfg.ell;
        rep["k"] = cfg.k;
        rep["primal_value"] = fit.primal_value;
        rep["dual_value"] = fit.dual_value;
        rep["duality_gap"] = fit.duality_gap;
        rep["kkt_residual"] = fit.kkt_residual;
        rep["max_violation"] = fit.max_violation;
        rep["active_count"] = fit.active_count;
        rep["changepoints"] = partition.change_points;
        rep["leading_sign"] = partition.leading_sign;
    } else {
        throw std::invalid_argument("fit: unknown method '" + cfg.method + "'");
    }

    write_curve_csv(cfg.output_path, grid, values, sd);
    if (!cfg.report_path.empty()) write_text(cfg.report_path, rep.dump(2) + "\n");
    if (cfg.emit_plot_data && !cfg.plot_data_path.empty())
        write_long_csv(cfg.plot_data_path, {{"fit", &grid, &values}});
    return 0;
}

json interval_json(const UncertaintyInterval& iv) {
    return json{{"center", iv.center}, {"sd", iv.sd}, {"lo", iv.lo}, {"hi", iv.hi}};
}

const char* rule_name(PlanRegion::Rule r) {
    switch (r) {
        case PlanRegion::Rule::outside: return "outside";
        case PlanRegion::Rule::isolated: return "isolated";
        case PlanRegion::Rule::even: return "even";
        default: return "odd";
    }
}

json pilot_report(const PilotResult& result, const RunConfig& cfg, const SampleSet& samples) {
    json rep;
    rep["schema_version"] = kSchemaVersion;
    rep["command"] = "pilot";
    rep["n"] = samples.size();
    rep["ell"] = cfg.ell;
    rep["m"] = cfg.m;
    rep["alpha"] = cfg.alpha;
    rep["h_gcv"] = result.first.h_gcv;
    rep["iota"] = result.first.iota;
    rep["h_n"] = result.first.h_n;
    rep["h_n_clamped"] = result.first.clamped;
    rep["sigma_used"] = result.sigma_used;
    rep["k_hat"] = result.plan.k_hat;
    rep["lambda_gcv"] = result.second.lambda_gcv;
    rep["final_crossings"] = result.second.final_crossings;
    rep["crossings_match"] = result.second.crossings_match;
    rep["intervals"] = json::array();
    for (const auto& iv : result.intervals) rep["intervals"].push_back(interval_json(iv));
    rep["regions"] = json::array();
    for (const auto& r : result.plan.regions)
        rep["regions"].push_back(json{{"lo", r.lo},
                                      {"hi", r.hi},
                                      {"derivative", r.derivative},
                                      {"sign", r.sign},
                                      {"rule", rule_name(r.rule)}});
    rep["notes"] = result.plan.notes;
    rep["primal_value"] = result.second.fit.primal_value;
    rep["duality_gap"] = result.second.fit.duality_gap;
    return rep;
}

int run_pilot_cmd(const RunConfig& cfg) {
    if (cfg.input_path.empty()) throw std::invalid_argument("pilot: needs --input");
    SampleSet samples = ingest_csv(cfg.input_path);
    if (samples.size() < 2 * cfg.m)
        throw std::invalid_argument("pilot: needs at least 2m data points");
    if (cfg.ell < 1) throw std::invalid_argument("pilot: needs --ell >= 1");

    PilotResult result = run_pilot(samples, cfg.ell, cfg.m, cfg.alpha);
    if (!cfg.output_path.empty()) {
        const auto grid = uniform_grid(0.0, 1.0, 401);
        const auto values = result.second.fit.model.evaluate_grid(grid, 0);
        write_curve_csv(cfg.output_path, grid, values);
        if (cfg.emit_plot_data && !cfg.plot_data_path.empty()) {
            const auto d2 = result.second.fit.model.evaluate_grid(grid, cfg.ell);
            write_long_csv(cfg.plot_data_path,
                           {{"fit", &grid, &values}, {"fit_ell", &grid, &d2}});
        }
    }
    const json rep = pilot_report(result, cfg, samples);
    if (!cfg.report_path.empty()) write_text(cfg.report_path, rep.dump(2) + "\n");
    std::cout << rep.dump(2) << std::endl;
    return 0;
}

json simulate_report_impl(const RunConfig& cfg, McInflectionResult* result_out = nullptr) {
    if (cfg.scenario_path.empty()) throw std::invalid_argument("simulate: needs --scenario");
    if (cfg.replicates < 1) throw std::invalid_argument("simulate: needs --replicates >= 1");
    json scenario_echo;
    const Scenario sc = load_scenario(cfg.scenario_path, scenario_echo);
    const auto result = monte_carlo_inflections(sc, cfg.replicates, cfg.seed);
    if (result_out) *result_out = result;
    json rep;
    rep["schema_version"] = kSchemaVersion;
    rep["command"] = "simulate";
    rep["seed"] = cfg.seed;
    rep["replicates"] = cfg.replicates;
    rep["empirical_mean"] = result.mean_count;
    rep["se"] = result.se;
    rep["predicted"] = result.predicted;
    rep["expected_excess"] = result.expected_excess;
    rep["k_true"] = result.k_true;
    rep["z_values"] = result.z_values;
    rep["d_n"] = result.d_n;
    rep["d_n_ok"] = result.d_n_ok;
    rep["warnings"] = result.warnings;
    rep["per_replicate_counts"] = result.counts;
    rep["scenario"] = scenario_echo;
    return rep;
}

int run_simulate(const RunConfig& cfg) {
    McInflectionResult result;
    const json rep = simulate_report_impl(cfg, &result);
    if (!cfg.report_path.empty()) write_text(cfg.report_path, rep.dump(2) + "\n");
    if (!cfg.crossings_csv.empty()) {
        std::ofstream out(cfg.crossings_csv);
        if (!out) throw std::invalid_argument("cannot open " + cfg.crossings_csv);
        out.precision(17);
        out << "replicate,location\n";
        for (std::size_t r = 0; r < result.locations.size(); ++r)
            for (double loc : result.locations[r]) out << r << ',' << loc << '\n';
    }
    std::cout << rep.dump(2) << std::endl;
    return 0;
}

}  // namespace

std::string simulate_report_json(const RunConfig& config) {
    return simulate_report_impl(config).dump(2) + "\n";
}

std::string pilot_report_json(const RunConfig& config) {
    SampleSet samples = ingest_csv(config.input_path);
    PilotResult result = run_pilot(samples, config.ell, config.m, config.alpha);
    return pilot_report(result, config, samples).dump(2) + "\n";
}

int run(const RunConfig& config) {
    try {
        if (config.command == "kernel") return run_kernel(config);
        if (config.command == "fit") return run_fit(config);
        if (config.command == "pilot") return run_pilot_cmd(config);
        if (config.command == "simulate") return run_simulate(config);
        throw std::invalid_argument("unknown command '" + config.command + "'");
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << std::endl;
        return 2;
    }
}

}  // namespace shapefit
