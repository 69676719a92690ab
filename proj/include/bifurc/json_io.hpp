#pragma once

// JSON (de)serialization for curves, scenarios and reports. Output uses
// ordered keys and round-trip double formatting, so identical inputs
// produce byte-identical documents.

#include "bifurc/core.hpp"
#include "bifurc/bifurcation.hpp"
#include "bifurc/hamiltonian_curve.hpp"
#include "bifurc/jordan.hpp"
#include "bifurc/krein.hpp"
#include "bifurc/spectral.hpp"
#include "bifurc/trajectory.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace bifurc {

using Json = nlohmann::ordered_json;

Json to_json(const Mat& m);
Json to_json(const CMat& m);
Json to_json(Complex z);
Mat mat_from_json(const Json& j);
Complex complex_from_json(const Json& j);

Json curve_to_json(const HamiltonianCurve& curve);
HamiltonianCurve curve_from_json(const Json& j);

Json spectrum_to_json(const Spectrum& spec);
Json signature_to_json(const KreinSignature& sig);
Json chains_to_json(const JordanChainSet& chains);
Json prediction_to_json(const BranchPrediction& pred);
Json dreport_to_json(const DReport& report);
Json convexity_to_json(const ConvexityReport& report);
Json stability_to_json(const StabilityVerdict& verdict);

struct Scenario {
    HamiltonianCurve curve;
    SymplecticMatrix gamma0;
    std::vector<double> grid;
    double tol = 1e-10;
    double t = 0.0;                    // analyze/predict evaluation time
    std::optional<Complex> lambda0;    // predict/verify target eigenvalue
    Json raw;
};

// Validates dimensions and tolerances; ContractError carries the failing
// field name.
Scenario scenario_from_json(const Json& j);
Scenario load_scenario(const std::string& path);

// CSV with header t,branch_id,re,im,on_circle,p,q
std::string paths_to_csv(const EigenPathSet& paths);

std::string dump(const Json& j);

}  // namespace bifurc
