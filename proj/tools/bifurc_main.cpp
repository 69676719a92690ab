// bifurc: eigenvalue bifurcation analysis of symplectic matrix paths.
//
//   bifurc analyze  <scenario.json> [--t T]            spectrum + Krein report
//   bifurc predict  <scenario.json> [--t0 T --lambda0 re,im] [--plot]
//   bifurc track    <scenario.json>                    CSV trajectories
//   bifurc detect-d <scenario.json> --from A --to B [--step S]
//   bifurc verify   <scenario.json> [--t0 T --lambda0 re,im]
//   bifurc reduce   <scenario.json> --center re,im --radius R
//
// Exit codes: 0 ok, 2 validation error, 3 numerical error, 4 unresolved
// structure.

#include "bifurc/charpoly.hpp"
#include "bifurc/json_io.hpp"
#include "bifurc/reduction.hpp"
#include "bifurc/svg.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace bifurc;

struct CommonArgs {
    std::string scenario_path;
    std::string out_dir;
    double tol = -1.0;
    std::vector<double> grid_override;
    bool plot = false;
};

std::filesystem::path out_path(const CommonArgs& args, const std::string& name) {
    std::filesystem::path dir = args.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("BIFURC_OUT_DIR");
        dir = env ? env : ".";
    }
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    // atomic per scenario: write then rename
    const std::filesystem::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp);
        out << content;
    }
    std::filesystem::rename(tmp, p);
    std::cout << p.string() << "\n";
}

Scenario load(const CommonArgs& args) {
    Scenario s = load_scenario(args.scenario_path);
    if (args.tol > 0) s.tol = args.tol;
    if (!args.grid_override.empty()) s.grid = args.grid_override;
    return s;
}

Complex parse_complex(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) return Complex(std::stod(text), 0.0);
    return Complex(std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1)));
}

int cmd_analyze(const CommonArgs& args, double t) {
    const Scenario s = load(args);
    PropagateOptions opts;
    opts.tol = s.tol;
    const double at = (t != 0.0) ? t : s.t;
    const Mat g = propagate_to(s.curve, s.gamma0.value, 0.0, at, opts);
    const Spectrum spec = eigen_decompose(g);

    Json out;
    out["t"] = at;
    out["spectrum"] = spectrum_to_json(spec);
    Json sigs = Json::array();
    for (const auto& cl : spec.clusters) {
        Json e;
        e["cluster"] = cl.id;
        e["value"] = to_json(cl.value);
        e["on_circle"] = on_unit_circle(cl.value, default_on_circle_tol(g));
        e["signature"] = signature_to_json(cluster_signature(g, spec, cl.id));
        sigs.push_back(e);
    }
    out["signatures"] = sigs;
    out["stability"] = stability_to_json(stability_verdict(g));
    out["convexity"] = convexity_to_json(check_convexity_assumption(s.curve.evaluate(at), g));
    write_file(out_path(args, "analyze.json"), dump(out));
    return 0;
}

int cmd_predict(const CommonArgs& args, double t0, const std::string& lambda_text) {
    const Scenario s = load(args);
    PropagateOptions opts;
    opts.tol = s.tol;
    const double at = (t0 != 0.0) ? t0 : s.t;
    const Mat g = propagate_to(s.curve, s.gamma0.value, 0.0, at, opts);

    Complex lambda0;
    if (!lambda_text.empty())
        lambda0 = parse_complex(lambda_text);
    else if (s.lambda0)
        lambda0 = *s.lambda0;
    else
        throw ContractError("predict: provide --lambda0 or a scenario lambda0 field");

    JordanOptions jopts;
    jopts.tol = std::max(1e-9, s.tol * 10);
    const BranchPrediction pred = predict_at(g, s.curve.evaluate(at), lambda0, jopts);
    write_file(out_path(args, "predict.json"), dump(prediction_to_json(pred)));
    if (args.plot) write_file(out_path(args, "predict_star.svg"), star_diagram_svg(pred));
    return 0;
}

int cmd_track(const CommonArgs& args) {
    const Scenario s = load(args);
    if (s.grid.size() < 2) throw ContractError("track: scenario must provide a grid");
    TrackOptions topts;
    topts.flow.tol = s.tol;
    const EigenPathSet paths = track_spectrum(s.curve, s.gamma0, s.grid, topts);
    write_file(out_path(args, "track.csv"), paths_to_csv(paths));
    if (args.plot) write_file(out_path(args, "track_circle.svg"), circle_plot_svg(paths));
    Json out;
    out["paths"] = static_cast<int>(paths.paths.size());
    out["samples"] = paths.sample_count();
    out["on_circle_tol"] = paths.on_circle_tol;
    bool unresolved = false;
    for (const auto& p : paths.paths) unresolved = unresolved || p.unresolved_collision;
    out["unresolved_collisions"] = unresolved;
    write_file(out_path(args, "track.json"), dump(out));
    return 0;
}

int cmd_detect_d(const CommonArgs& args, double from, double to, double step, double dtol) {
    const Scenario s = load(args);
    PropagateOptions opts;
    opts.tol = s.tol;
    const DReport report =
        detect_D(s.curve, s.gamma0, from, to, step > 0 ? step : (to - from) / 200.0,
                 dtol > 0 ? dtol : 1e-4, opts);
    write_file(out_path(args, "detect_d.json"), dump(dreport_to_json(report)));
    return 0;
}

int cmd_verify(const CommonArgs& args, double t0, const std::string& lambda_text) {
    const Scenario s = load(args);
    PropagateOptions opts;
    opts.tol = s.tol;
    const double at = (t0 != 0.0) ? t0 : s.t;
    const Mat g_mat = propagate_to(s.curve, s.gamma0.value, 0.0, at, opts);
    const SymplecticMatrix g = SymplecticMatrix::unchecked(g_mat);

    Complex lambda0;
    if (!lambda_text.empty())
        lambda0 = parse_complex(lambda_text);
    else if (s.lambda0)
        lambda0 = *s.lambda0;
    else
        throw ContractError("verify: provide --lambda0 or a scenario lambda0 field");

    JordanOptions jopts;
    jopts.tol = std::max(1e-9, s.tol * 10);
    const JordanChainSet chains = jordan_chains(g.value, lambda0, jopts);

    // shifted curve view: builtins used here have constant A, so the
    // coefficient-order ladder runs on the same curve from gamma(t0)
    std::vector<double> ladder;
    for (int k = 0; k <= 30; ++k) ladder.push_back(1e-5 * std::pow(10.0, 3.0 * k / 30.0));
    const CoefficientOrderReport orders =
        verify_coeff_orders(s.curve, g, lambda0, ladder, chains.sizes, opts);

    Json out;
    out["t0"] = at;
    out["lambda0"] = to_json(lambda0);
    out["chains"] = chains_to_json(chains);
    Json rows = Json::array();
    for (const auto& r : orders.rows) {
        Json e;
        e["k"] = r.k;
        e["phi"] = r.phi_k;
        e["slope"] = r.slope;
        e["slope_ok"] = r.slope_ok;
        e["exact_order"] = r.exact_order;
        if (r.exact_order) {
            e["limit_measured"] = to_json(r.limit_measured);
            e["limit_predicted"] = to_json(r.limit_predicted);
            e["limit_rel_error"] = r.limit_rel_error;
            e["limit_ok"] = r.limit_ok;
        }
        e["skipped_noise"] = r.skipped_noise;
        rows.push_back(e);
    }
    out["coefficient_orders"] = rows;
    out["all_pass"] = orders.all_pass;
    write_file(out_path(args, "verify.json"), dump(out));
    return orders.all_pass ? 0 : 3;
}

int cmd_reduce(const CommonArgs& args, const std::string& center_text, double radius) {
    const Scenario s = load(args);
    if (s.grid.size() < 3) throw ContractError("reduce: scenario must provide a grid");
    PropagateOptions opts;
    opts.tol = s.tol;
    const Contour contour{parse_complex(center_text), radius};

    const FlowResult flow = propagate(s.curve, s.gamma0, s.grid, opts);
    const std::vector<Mat> P = projector_path(flow.gammas, contour);
    const int two_k = static_cast<int>(std::lround(P[0].trace()));
    if (two_k <= 0 || two_k % 2 != 0)
        throw StructureError("reduce: projector rank " + std::to_string(two_k) +
                             " is not a positive even number");
    // seed: leading right singular directions of P(t0)
    Eigen::JacobiSVD<Mat> svd(P[0], Eigen::ComputeThinU);
    const Mat seed = svd.matrixU().leftCols(two_k);
    const SymplecticFrame frame = symplectic_frame(s.grid, P, seed, 1e-8);
    const ReducedSystem sys = reduced_monodromy(s.grid, flow.gammas, frame, s.curve, contour);
    const ReducedScenario reduced = reduced_scenario(s.grid, frame, sys);

    Json out;
    out["curve"] = curve_to_json(reduced.curve);
    out["gamma0"] = to_json(reduced.gamma0.value);
    out["grid"] = s.grid;
    out["tol"] = s.tol;
    out["frame_residual"] = frame.worst_frame_residual;
    out["ode_residual"] = sys.worst_ode_residual;
    out["spectrum_mismatch"] = sys.worst_spectrum_mismatch;
    write_file(out_path(args, "reduced_scenario.json"), dump(out));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eigenvalue bifurcation analysis along symplectic paths"};
    app.require_subcommand(1);

    CommonArgs common;
    double t = 0.0, from = 0.0, to = 0.0, step = -1.0, dtol = -1.0, radius = 0.0;
    std::string lambda_text, center_text;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("scenario", common.scenario_path, "scenario JSON file")->required();
        sub->add_option("--out-dir", common.out_dir, "output directory (default $BIFURC_OUT_DIR or .)");
        sub->add_option("--tol", common.tol, "override scenario tolerance");
        sub->add_option("--grid", common.grid_override, "override scenario grid (list of times)");
        sub->add_flag("--plot", common.plot, "emit SVG plots");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "spectrum, signatures, stability at t");
    add_common(analyze);
    analyze->add_option("--t", t, "evaluation time");

    CLI::App* predict = app.add_subcommand("predict", "first-order branch prediction at (t0, lambda0)");
    add_common(predict);
    predict->add_option("--t0", t, "bifurcation time");
    predict->add_option("--lambda0", lambda_text, "eigenvalue, as re,im");

    CLI::App* track = app.add_subcommand("track", "eigenvalue trajectories over the scenario grid");
    add_common(track);

    CLI::App* detect = app.add_subcommand("detect-d", "Krein-indefinite set detection");
    add_common(detect);
    detect->add_option("--from", from, "interval start")->required();
    detect->add_option("--to", to, "interval end")->required();
    detect->add_option("--step", step, "scan step");
    detect->add_option("--dtol", dtol, "refinement tolerance");

    CLI::App* verify = app.add_subcommand("verify", "coefficient-order laws at (t0, lambda0)");
    add_common(verify);
    verify->add_option("--t0", t, "bifurcation time");
    verify->add_option("--lambda0", lambda_text, "eigenvalue, as re,im");

    CLI::App* reduce = app.add_subcommand("reduce", "dimension reduction through a spectral contour");
    add_common(reduce);
    reduce->add_option("--center", center_text, "contour center, as re,im")->required();
    reduce->add_option("--radius", radius, "contour radius")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return cmd_analyze(common, t);
        if (predict->parsed()) return cmd_predict(common, t, lambda_text);
        if (track->parsed()) return cmd_track(common);
        if (detect->parsed()) return cmd_detect_d(common, from, to, step, dtol);
        if (verify->parsed()) return cmd_verify(common, t, lambda_text);
        if (reduce->parsed()) return cmd_reduce(common, center_text, radius);
    } catch (const bifurc::ContractError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        std::cout << "{\"error\": \"validation\"}\n";
        return 2;
    } catch (const bifurc::StructureError& e) {
        std::cerr << "structure error: " << e.what() << "\n";
        std::cout << "{\"error\": \"structure\"}\n";
        return 4;
    } catch (const bifurc::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        std::cout << "{\"error\": \"numerical\"}\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
