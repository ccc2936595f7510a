// reachlab: heat content, Steiner/curvature measures and blow-up diagnostics
// for compact sets with positive reach.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "reachlab/blowup.hpp"
#include "reachlab/expansion.hpp"
#include "reachlab/heat.hpp"
#include "reachlab/io.hpp"
#include "reachlab/shape.hpp"
#include "reachlab/steiner.hpp"
#include "reachlab/strata.hpp"

namespace rl = reachlab;
using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw rl::ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw rl::ValidationError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}


// phi spec: inline JSON, "@file.json", or a bare number (constant).
json parse_phi_json(const std::string& spec) {
    if (spec.empty()) return json{{"kind", "constant"}, {"c", 1.0}};
    if (spec[0] == '@') return load_json_file(spec.substr(1));
    if (spec[0] == '{') {
        try {
            return json::parse(spec);
        } catch (const json::exception& e) {
            throw rl::ValidationError(std::string("invalid phi JSON: ") + e.what());
        }
    }
    try {
        std::size_t pos = 0;
        double c = std::stod(spec, &pos);
        if (pos == spec.size()) return json{{"kind", "constant"}, {"c", c}};
    } catch (...) {
    }
    throw rl::ValidationError("cannot parse phi spec: " + spec);
}

std::vector<double> sorted_increasing(std::vector<double> g, const char* what) {
    if (g.empty()) throw rl::ValidationError(std::string(what) + ": empty grid");
    for (double v : g)
        if (!(v > 0.0)) throw rl::ValidationError(std::string(what) + ": grid must be positive");
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1]))
            throw rl::ValidationError(std::string(what) + ": grid must be strictly increasing");
    return g;
}

struct CommonArgs {
    std::string shape_path;
    std::string out_path;
    int threads = 0;
    std::uint64_t seed = 1;
    std::uint64_t samples = 1'000'000;
};

json base_config(const std::string& command, const CommonArgs& a, const json& shape_json) {
    json cfg;
    cfg["command"] = command;
    cfg["shape"] = shape_json;
    cfg["seed"] = a.seed;
    cfg["samples"] = a.samples;
    return cfg;
}

int run_validate(const CommonArgs& a) {
    json shape_json = load_json_file(a.shape_path);
    rl::Shape shape = rl::shape_from_json(shape_json);
    json cfg = base_config("validate", a, shape_json);
    json meta;
    meta["valid"] = true;
    meta["type"] = shape_json.at("type");
    meta["ambient_dim"] = shape.ambient_dim();
    double reach = shape.reach();
    if (std::isinf(reach))
        meta["reach"] = "inf";
    else
        meta["reach"] = reach;
    meta["volume"] = shape.volume();
    auto [lo, hi] = shape.bounding_box();
    meta["bounding_box"] = {{"lo", lo}, {"hi", hi}};
    meta["inradius_lower_bound"] = shape.inradius_lower_bound();
    meta["config_hash"] = rl::config_hash_hex(cfg);
    std::string text = meta.dump(2) + "\n";
    if (a.out_path.empty())
        std::cout << text;
    else
        rl::atomic_write_file(a.out_path, text);
    return 0;
}

int run_strata(const CommonArgs& a, std::uint64_t mc_samples) {
    json shape_json = load_json_file(a.shape_path);
    rl::Shape shape = rl::shape_from_json(shape_json);
    json cfg = base_config("strata", a, shape_json);
    rl::StrataResult sr = rl::boundary_strata(shape, mc_samples, a.seed);
    rl::CsvBuilder csv("strata", rl::config_hash_hex(cfg),
                       {"dim", "measure", "external_angle", "external_angle_stderr",
                        "wedge_angle"});
    csv.comment("reach=" + (std::isinf(sr.reach) ? std::string("inf") : rl::format_g17(sr.reach)));
    for (const auto& s : sr.strata) {
        csv.row({std::to_string(s.dim), rl::format_g17(s.measure), rl::format_g17(s.external_angle),
                 rl::format_g17(s.external_angle_stderr),
                 s.wedge_angle ? rl::format_g17(*s.wedge_angle) : ""});
    }
    rl::atomic_write_file(a.out_path, csv.str());
    return 0;
}

int run_steiner(const CommonArgs& a, const std::string& rgrid_spec) {
    json shape_json = load_json_file(a.shape_path);
    rl::Shape shape = rl::shape_from_json(shape_json);
    std::vector<double> rgrid = rgrid_spec.empty()
                                    ? rl::default_r_grid(shape)
                                    : sorted_increasing(rl::parse_grid(rgrid_spec), "rgrid");
    json cfg = base_config("steiner", a, shape_json);
    cfg["rgrid"] = rgrid;

    rl::SteinerFit exact =
        rl::fit_curvature_measures(shape, rgrid, rl::SteinerSource::exact);
    rl::SteinerFit mc = rl::fit_curvature_measures(shape, rgrid, rl::SteinerSource::mc, a.samples,
                                                   a.seed, a.threads);

    rl::CsvBuilder csv("steiner", rl::config_hash_hex(cfg), {"r", "exact", "mc", "stderr"});
    for (std::size_t i = 0; i < rgrid.size(); ++i)
        csv.row_numeric({rgrid[i], exact.volumes[i], mc.volumes[i], mc.volume_stderr[i]});
    const int n = shape.ambient_dim();
    for (int k = 0; k < n; ++k)
        csv.row({"C" + std::to_string(k), rl::format_g17(exact.curvature[k]),
                 rl::format_g17(mc.curvature[k]), rl::format_g17(mc.curvature_stderr[k])});
    rl::atomic_write_file(a.out_path, csv.str());
    return 0;
}

rl::HeatEstimatorConfig heat_config(const CommonArgs& a, const std::string& method,
                                    double truncation) {
    rl::HeatEstimatorConfig cfg;
    cfg.samples = a.samples;
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    cfg.truncation = truncation;
    if (method == "mc")
        cfg.method = rl::HeatEstimatorConfig::Method::mc;
    else if (method == "exact")
        cfg.method = rl::HeatEstimatorConfig::Method::exact;
    else if (method == "tube")
        cfg.method = rl::HeatEstimatorConfig::Method::tube;
    else if (method == "auto")
        cfg.method = rl::HeatEstimatorConfig::Method::auto_select;
    else
        throw rl::ValidationError("unknown method: " + method);
    return cfg;
}

int run_heat(const CommonArgs& a, const std::string& phi_spec, const std::string& tgrid_spec,
             const std::string& method, double truncation) {
    json shape_json = load_json_file(a.shape_path);
    rl::Shape shape = rl::shape_from_json(shape_json);
    json phi_json = parse_phi_json(phi_spec);
    rl::TestFunction phi = rl::test_function_from_json(phi_json);
    std::vector<double> tgrid = tgrid_spec.empty()
                                    ? rl::default_t_grid(shape)
                                    : sorted_increasing(rl::parse_grid(tgrid_spec), "tgrid");
    json cfg = base_config("heat", a, shape_json);
    cfg["phi"] = phi_json;
    cfg["tgrid"] = tgrid;
    cfg["method"] = method;

    rl::HeatEstimatorConfig hc = heat_config(a, method, truncation);
    rl::CsvBuilder csv("heat", rl::config_hash_hex(cfg), {"t", "estimate", "stderr", "method"});
    for (double t : tgrid) {
        rl::HeatSample s = rl::heat_content(shape, phi, t, hc);
        csv.row({rl::format_g17(s.t), rl::format_g17(s.estimate), rl::format_g17(s.stderr_value),
                 s.method});
    }
    rl::atomic_write_file(a.out_path, csv.str());
    return 0;
}

rl::AlphaChoice parse_alpha(const std::string& spec) {
    rl::AlphaChoice c;
    if (spec == "paper") {
        c.mode = rl::AlphaChoice::Mode::paper;
    } else if (spec == "auto") {
        c.mode = rl::AlphaChoice::Mode::oracle_implied;
    } else {
        c.mode = rl::AlphaChoice::Mode::fixed;
        try {
            c.value = std::stod(spec);
        } catch (...) {
            throw rl::ValidationError("alpha must be auto, paper or a number: " + spec);
        }
    }
    return c;
}

void write_report_outputs(const rl::ExpansionReport& rep, const json& cfg,
                          const std::string& out_path, const std::string& table_path) {
    json j = rl::expansion_report_to_json(rep);
    j["provenance"] = cfg;
    j["config_hash"] = rl::config_hash_hex(cfg);
    rl::atomic_write_file(out_path, j.dump(2) + "\n");
    if (!table_path.empty()) {
        rl::CsvBuilder csv("expand", rl::config_hash_hex(cfg), {"t", "estimate", "stderr", "method"});
        for (const auto& s : rep.samples)
            csv.row({rl::format_g17(s.t), rl::format_g17(s.estimate),
                     rl::format_g17(s.stderr_value), s.method});
        csv.comment("fitted a1=" + rl::format_g17(rep.fitted.coeffs[0]) +
                    " a2=" + rl::format_g17(rep.fitted.coeffs[1]));
        rl::atomic_write_file(table_path, csv.str());
    }
}

int run_expand(const CommonArgs& a, const std::string& phi_spec, const std::string& tgrid_spec,
               const std::string& method, const std::string& alpha_spec,
               const std::string& convention, double truncation, const std::string& table_path) {
    json shape_json = load_json_file(a.shape_path);
    rl::Shape shape = rl::shape_from_json(shape_json);
    json phi_json = parse_phi_json(phi_spec);
    rl::TestFunction phi = rl::test_function_from_json(phi_json);
    std::vector<double> tgrid = tgrid_spec.empty()
                                    ? rl::default_t_grid(shape)
                                    : sorted_increasing(rl::parse_grid(tgrid_spec), "tgrid");
    rl::CurvatureConvention conv = convention == "bundle" ? rl::CurvatureConvention::bundle
                                                          : rl::CurvatureConvention::graph;
    json cfg = base_config("expand", a, shape_json);
    cfg["phi"] = phi_json;
    cfg["tgrid"] = tgrid;
    cfg["method"] = method;
    cfg["alpha"] = alpha_spec;
    cfg["convention"] = convention;

    rl::ExpansionReport rep = rl::compare_report(shape, phi, tgrid, heat_config(a, method, truncation),
                                                 parse_alpha(alpha_spec), conv);
    write_report_outputs(rep, cfg, a.out_path, table_path);
    return 0;
}

int run_report(const CommonArgs& a, const std::string& phi_spec, const std::string& in_csv,
               const std::string& alpha_spec, const std::string& convention) {
    json shape_json = load_json_file(a.shape_path);
    rl::Shape shape = rl::shape_from_json(shape_json);
    json phi_json = parse_phi_json(phi_spec);
    rl::TestFunction phi = rl::test_function_from_json(phi_json);
    rl::CurvatureConvention conv = convention == "bundle" ? rl::CurvatureConvention::bundle
                                                          : rl::CurvatureConvention::graph;

    std::ifstream in(in_csv);
    if (!in) throw rl::ValidationError("cannot open samples CSV: " + in_csv);
    std::vector<rl::HeatSample> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("t,", 0) == 0) continue;
        std::stringstream ss(line);
        std::string cell;
        rl::HeatSample s;
        try {
            std::getline(ss, cell, ',');
            s.t = std::stod(cell);
            std::getline(ss, cell, ',');
            s.estimate = std::stod(cell);
            std::getline(ss, cell, ',');
            s.stderr_value = std::stod(cell);
        } catch (...) {
            throw rl::ValidationError("bad CSV row in " + in_csv + ": " + line);
        }
        if (std::getline(ss, cell, ',')) s.method = cell;
        samples.push_back(s);
    }
    if (samples.empty()) throw rl::ValidationError("no samples found in " + in_csv);

    json cfg = base_config("report", a, shape_json);
    cfg["phi"] = phi_json;
    cfg["in"] = in_csv;
    cfg["alpha"] = alpha_spec;
    cfg["convention"] = convention;

    rl::ExpansionReport rep =
        rl::compare_report_from_samples(shape, phi, samples, parse_alpha(alpha_spec), conv);
    write_report_outputs(rep, cfg, a.out_path, "");
    return 0;
}

int run_blowup(const CommonArgs& a, const std::string& point_spec, const std::string& rho_spec,
               double window, double pitch) {
    json shape_json = load_json_file(a.shape_path);
    rl::Shape shape = rl::shape_from_json(shape_json);
    rl::Vec x0 = rl::parse_grid(point_spec);  // comma list of coordinates
    std::vector<double> rho = rl::parse_grid(rho_spec);
    std::sort(rho.begin(), rho.end(), std::greater<double>());
    json cfg = base_config("blowup", a, shape_json);
    cfg["point"] = x0;
    cfg["rhogrid"] = rho;
    cfg["window"] = window;

    rl::ConvergenceTable table =
        rl::convergence_table(shape, x0, rho, window, a.samples, a.seed, pitch, a.threads);
    rl::CsvBuilder csv("blowup", rl::config_hash_hex(cfg),
                       {"rho", "hausdorff", "hausdorff_err", "symdiff", "symdiff_stderr"});
    csv.comment("reach=" + (std::isinf(table.shape_reach) ? std::string("inf")
                                                          : rl::format_g17(table.shape_reach)));
    for (std::size_t i = 0; i < table.rho.size(); ++i)
        csv.row_numeric({table.rho[i], table.hausdorff[i], table.hausdorff_err[i],
                         table.symdiff[i], table.symdiff_stderr[i]});
    rl::atomic_write_file(a.out_path, csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heat content and curvature measures of sets with positive reach"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string phi_spec, tgrid_spec, rgrid_spec, rho_spec, point_spec;
    std::string method = "auto", alpha_spec = "paper", convention = "graph";
    std::string table_path, in_csv;
    double truncation = 0.0, window = 1.0, pitch = 0.0;
    std::uint64_t strata_mc = 10'000'000;

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--shape", args.shape_path, "shape JSON file")->required();
        sub->add_option("--threads", args.threads, "worker threads (0: REACHLAB_THREADS or 1)");
        sub->add_option("--seed", args.seed, "RNG seed");
        sub->add_option("--samples", args.samples, "Monte-Carlo sample count");
        auto* opt = sub->add_option("--out", args.out_path, "output path");
        if (needs_out) opt->required();
    };

    CLI::App* validate = app.add_subcommand("validate", "construct a shape and report metadata");
    add_common(validate, false);

    CLI::App* strata = app.add_subcommand("strata", "boundary strata CSV");
    add_common(strata, true);
    strata->add_option("--mc-samples", strata_mc, "samples for MC external angles (n >= 4)");

    CLI::App* steiner = app.add_subcommand("steiner", "parallel volumes and curvature-measure fit");
    add_common(steiner, true);
    steiner->add_option("--rgrid", rgrid_spec, "radii a:b:m or comma list (default: Chebyshev)");

    CLI::App* heat = app.add_subcommand("heat", "heat content samples");
    add_common(heat, true);
    heat->add_option("--phi", phi_spec, "test function JSON, @file or constant");
    heat->add_option("--tgrid", tgrid_spec, "t grid a:b:m or comma list (default: dyadic)");
    heat->add_option("--method", method, "mc|exact|tube|auto");
    heat->add_option("--truncation", truncation, "tube truncation radius (0: automatic)");

    CLI::App* expand = app.add_subcommand("expand", "expansion coefficients and comparison report");
    add_common(expand, true);
    expand->add_option("--phi", phi_spec, "test function JSON, @file or constant");
    expand->add_option("--tgrid", tgrid_spec, "t grid (default: dyadic)");
    expand->add_option("--method", method, "mc|exact|tube|auto");
    expand->add_option("--alpha", alpha_spec, "auto|paper|<value>");
    expand->add_option("--convention", convention, "graph|bundle");
    expand->add_option("--truncation", truncation, "tube truncation radius (0: automatic)");
    expand->add_option("--table", table_path, "also write the samples table CSV");

    CLI::App* report = app.add_subcommand("report", "aggregate existing heat CSV into a report");
    add_common(report, true);
    report->add_option("--phi", phi_spec, "test function JSON, @file or constant");
    report->add_option("--in", in_csv, "heat samples CSV")->required();
    report->add_option("--alpha", alpha_spec, "auto|paper|<value>");
    report->add_option("--convention", convention, "graph|bundle");

    CLI::App* blowup = app.add_subcommand("blowup", "blow-up convergence table");
    add_common(blowup, true);
    blowup->add_option("--point", point_spec, "boundary point, comma separated")->required();
    blowup->add_option("--rhogrid", rho_spec, "scales a:b:m or comma list")->required();
    blowup->add_option("--window", window, "window radius (default 1)");
    blowup->add_option("--pitch", pitch, "hausdorff grid pitch (default window/512)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(validate)) return run_validate(args);
        if (app.got_subcommand(strata)) return run_strata(args, strata_mc);
        if (app.got_subcommand(steiner)) return run_steiner(args, rgrid_spec);
        if (app.got_subcommand(heat))
            return run_heat(args, phi_spec, tgrid_spec, method, truncation);
        if (app.got_subcommand(expand))
            return run_expand(args, phi_spec, tgrid_spec, method, alpha_spec, convention,
                              truncation, table_path);
        if (app.got_subcommand(report))
            return run_report(args, phi_spec, in_csv, alpha_spec, convention);
        if (app.got_subcommand(blowup))
            return run_blowup(args, point_spec, rho_spec, window, pitch);
        std::cerr << "error: unknown command\n";
        return 2;
    } catch (const rl::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const rl::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
