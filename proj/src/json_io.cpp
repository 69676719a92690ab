#include "bifurc/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace bifurc {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Json to_json(const Mat& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

Json to_json(const CMat& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Mat mat_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw ContractError("matrix JSON must be a non-empty array");
    const auto rows = j.size();
    const auto cols = j[0].size();
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r) {
        if (j[r].size() != cols) throw ContractError("matrix JSON rows have uneven lengths");
        for (size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
    return m;
}

Complex complex_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2) throw ContractError("complex JSON must be [re, im]");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

Json curve_to_json(const HamiltonianCurve& curve) {
    Json j;
    j["dim"] = curve.dim();
    switch (curve.kind()) {
        case CurveKind::Constant:
            j["kind"] = "constant";
            j["matrix"] = to_json(curve.coefficients().front());
            break;
        case CurveKind::Polynomial: {
            j["kind"] = "poly";
            j["basis"] = "monomial";
            Json cs = Json::array();
            for (const auto& m : curve.coefficients()) cs.push_back(to_json(m));
            j["coeffs"] = cs;
            break;
        }
        case CurveKind::Bernstein: {
            j["kind"] = "poly";
            j["basis"] = "bernstein";
            Json cs = Json::array();
            for (const auto& m : curve.coefficients()) cs.push_back(to_json(m));
            j["control"] = cs;
            j["domain"] = Json::array({-1.0, 1.0});
            break;
        }
        case CurveKind::Samples: {
            j["kind"] = "samples";
            j["times"] = curve.sample_times();
            Json vs = Json::array();
            for (const auto& m : curve.coefficients()) vs.push_back(to_json(m));
            j["values"] = vs;
            break;
        }
        case CurveKind::Builtin:
            j["kind"] = "builtin";
            j["name"] = curve.builtin_name();
            break;
    }
    if (curve.period()) j["period"] = *curve.period();
    if (curve.has_parameter()) j["epsilon_direction"] = curve_to_json(*curve.direction());
    return j;
}

HamiltonianCurve curve_from_json(const Json& j) {
    if (!j.contains("kind")) throw ContractError("curve JSON: missing 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    HamiltonianCurve curve;
    if (kind == "constant") {
        curve = HamiltonianCurve::constant(mat_from_json(j.at("matrix")));
    } else if (kind == "poly") {
        const std::string basis = j.value("basis", std::string("monomial"));
        std::vector<Mat> ms;
        const Json& arr = (basis == "bernstein") ? j.at("control") : j.at("coeffs");
        for (const auto& e : arr) ms.push_back(mat_from_json(e));
        curve = (basis == "bernstein") ? HamiltonianCurve::bernstein(std::move(ms))
                                       : HamiltonianCurve::polynomial(std::move(ms));
    } else if (kind == "samples") {
        std::vector<double> ts = j.at("times").get<std::vector<double>>();
        std::vector<Mat> ms;
        for (const auto& e : j.at("values")) ms.push_back(mat_from_json(e));
        curve = HamiltonianCurve::samples(std::move(ts), std::move(ms));
    } else if (kind == "builtin") {
        curve = HamiltonianCurve::builtin(j.at("name").get<std::string>());
    } else {
        throw ContractError("curve JSON: unknown kind '" + kind + "'");
    }
    if (j.contains("period")) curve.set_period(j["period"].get<double>());
    if (j.contains("epsilon_direction"))
        curve = curve.with_direction(curve_from_json(j["epsilon_direction"]));
    return curve;
}

Json spectrum_to_json(const Spectrum& spec) {
    Json j;
    j["cluster_tol"] = spec.cluster_tol;
    Json arr = Json::array();
    for (const auto& cl : spec.clusters) {
        Json c;
        c["value"] = to_json(cl.value);
        c["multiplicity"] = cl.multiplicity;
        c["cluster"] = cl.id;
        arr.push_back(c);
    }
    j["eigenvalues"] = arr;
    return j;
}

Json signature_to_json(const KreinSignature& sig) {
    Json j;
    j["p"] = sig.p;
    j["q"] = sig.q;
    j["z"] = sig.z;
    j["label"] = sig.label();
    return j;
}

Json chains_to_json(const JordanChainSet& chains) {
    Json j;
    j["lambda0"] = to_json(chains.lambda0);
    j["theta0"] = chains.theta0;
    j["sizes"] = chains.sizes;
    Json g;
    g["s"] = chains.grouping.s;
    g["m"] = chains.grouping.m;
    g["n"] = chains.grouping.n;
    j["grouping"] = g;
    j["rank_staircase"] = chains.rank_staircase;
    j["chain_residual"] = chains.chain_residual;
    j["basis_sigma_min"] = chains.basis_sigma_min;
    Json all = Json::array();
    for (const auto& chain : chains.chains) {
        Json vecs = Json::array();
        for (const auto& v : chain) {
            Json entries = Json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i) entries.push_back(to_json(v(i)));
            vecs.push_back(entries);
        }
        all.push_back(vecs);
    }
    j["chains"] = all;
    return j;
}

Json prediction_to_json(const BranchPrediction& pred) {
    Json j;
    j["lambda0"] = to_json(pred.lambda0);
    j["theta0"] = pred.theta0;
    j["sizes"] = pred.sizes;
    Json roots = Json::array();
    for (const auto& r : pred.roots_per_group) roots.push_back(r);
    j["roots_per_group"] = roots;
    Json arr = Json::array();
    for (const auto& b : pred.branches) {
        Json e;
        e["l"] = b.l;
        e["p"] = b.p;
        e["q"] = b.q;
        e["a"] = b.a;
        e["n"] = b.n;
        e["holder"] = b.holder;
        e["star_angle"] = 2.0 * M_PI / b.n;
        e["lead_pos"] = to_json(b.lead_pos);
        e["lead_neg"] = to_json(b.lead_neg);
        e["fate_pos"] = to_string(b.fate_pos);
        e["fate_neg"] = to_string(b.fate_neg);
        arr.push_back(e);
    }
    j["branches"] = arr;
    return j;
}

Json dreport_to_json(const DReport& report) {
    Json j;
    j["interval"] = Json::array({report.lo, report.hi});
    j["tol"] = report.tol;
    j["grid_step"] = report.grid_step;
    j["on_circle_tol"] = report.on_circle_tol;
    Json arr = Json::array();
    for (const auto& iv : report.intervals) {
        Json e;
        e["lo"] = iv.lo;
        e["hi"] = iv.hi;
        e["width"] = iv.width();
        e["eigenvalue"] = to_json(iv.where);
        arr.push_back(e);
    }
    j["sub_intervals"] = arr;
    Json hist = Json::array();
    for (const auto& lvl : report.history) {
        Json e;
        e["ctol"] = lvl.ctol;
        e["widths"] = lvl.widths;
        hist.push_back(e);
    }
    j["refinement_history"] = hist;
    j["assumption_violations"] = report.assumption_violations;
    return j;
}

Json convexity_to_json(const ConvexityReport& report) {
    Json j;
    j["satisfied"] = report.satisfied;
    j["worst_margin"] = report.worst_margin;
    j["on_circle_tol"] = report.on_circle_tol;
    Json arr = Json::array();
    for (const auto& w : report.per_eigenvalue) {
        Json e;
        e["omega"] = to_json(w.omega);
        e["margin"] = w.margin;
        arr.push_back(e);
    }
    j["per_eigenvalue"] = arr;
    return j;
}

Json stability_to_json(const StabilityVerdict& verdict) {
    Json j;
    switch (verdict.verdict) {
        case StabilityClass::Unstable: j["verdict"] = "unstable"; break;
        case StabilityClass::Stable: j["verdict"] = "stable"; break;
        case StabilityClass::StronglyStable: j["verdict"] = "strongly-stable"; break;
    }
    j["reasons"] = verdict.reasons;
    j["on_circle_tol"] = verdict.on_circle_tol;
    return j;
}

Scenario scenario_from_json(const Json& j) {
    Scenario s;
    s.raw = j;
    if (!j.contains("curve")) throw ContractError("scenario: missing 'curve'");
    s.curve = curve_from_json(j["curve"]);

    const Json g0 = j.value("gamma0", Json("default"));
    if (g0.is_string()) {
        const std::string name = g0.get<std::string>();
        if (name == "identity") {
            s.gamma0 = SymplecticMatrix::checked(Mat::Identity(s.curve.dim(), s.curve.dim()));
        } else if (name == "default") {
            s.gamma0 = (s.curve.kind() == CurveKind::Builtin)
                           ? builtin_initial(s.curve.builtin_name())
                           : SymplecticMatrix::checked(Mat::Identity(s.curve.dim(), s.curve.dim()));
        } else {
            throw ContractError("scenario: gamma0 must be 'identity', 'default', or a matrix");
        }
    } else {
        const Mat m = mat_from_json(g0);
        if (m.rows() != s.curve.dim())
            throw ContractError("scenario: gamma0 dimension disagrees with the curve");
        s.gamma0 = SymplecticMatrix::checked(m, 1e-8);
    }

    if (j.contains("grid")) {
        const Json& g = j["grid"];
        if (g.is_array()) {
            s.grid = g.get<std::vector<double>>();
        } else {
            const double from = g.at("from").get<double>();
            const double to = g.at("to").get<double>();
            const int points = g.at("points").get<int>();
            if (points < 2) throw ContractError("scenario: grid.points must be >= 2");
            for (int i = 0; i < points; ++i)
                s.grid.push_back(from + (to - from) * i / (points - 1));
        }
    }
    s.tol = j.value("tol", 1e-10);
    if (!(s.tol > 0)) throw ContractError("scenario: tol must be positive");
    s.t = j.value("t", 0.0);
    if (j.contains("lambda0")) s.lambda0 = complex_from_json(j["lambda0"]);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open scenario file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ContractError("scenario JSON parse error in " + path + ": " + e.what());
    }
    return scenario_from_json(j);
}

std::string paths_to_csv(const EigenPathSet& paths) {
    std::ostringstream out;
    out << "t,branch_id,re,im,on_circle,p,q\n";
    for (int k = 0; k < paths.sample_count(); ++k)
        for (const auto& p : paths.paths) {
            const auto& s = p.samples[static_cast<size_t>(k)];
            out << fmt_double(s.t) << ',' << p.id << ',' << fmt_double(s.value.real()) << ','
                << fmt_double(s.value.imag()) << ',' << (s.on_circle ? 1 : 0) << ','
                << s.cluster_signature.p << ',' << s.cluster_signature.q << '\n';
        }
    return out.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace bifurc
