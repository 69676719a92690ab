#pragma once

// Static SVG emission: star diagrams of predicted branch tangents and
// unit-circle trajectory plots colored by Krein type. Presentation only;
// no influence on computed results.

#include "bifurc/bifurcation.hpp"
#include "bifurc/trajectory.hpp"

#include <string>

namespace bifurc {

std::string star_diagram_svg(const BranchPrediction& pred, int size_px = 480);
std::string circle_plot_svg(const EigenPathSet& paths, int size_px = 480);

}  // namespace bifurc
