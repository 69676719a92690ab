#include "bifurc/svg.hpp"

#include <cmath>
#include <sstream>

namespace bifurc {

namespace {

const char* fate_color(BranchFate f) {
    switch (f) {
        case BranchFate::CirclePositive: return "#d62728";
        case BranchFate::CircleNegative: return "#1f77b4";
        case BranchFate::OffCircle: return "#7f7f7f";
    }
    return "#000000";
}

}  // namespace

std::string star_diagram_svg(const BranchPrediction& pred, int size_px) {
    const double c = size_px / 2.0;
    const double R = 0.42 * size_px;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_px << "\" height=\""
      << size_px << "\" viewBox=\"0 0 " << size_px << " " << size_px << "\">\n";
    s << "  <circle cx=\"" << c << "\" cy=\"" << c << "\" r=\"" << R
      << "\" fill=\"none\" stroke=\"#bbbbbb\"/>\n";
    // local tangent rays at lambda0, drawn in the blown-up chart
    for (const auto& b : pred.branches) {
        const Complex dir = b.lead_pos / std::abs(b.lead_pos);
        const double x = c + 0.38 * size_px * dir.real();
        const double y = c - 0.38 * size_px * dir.imag();
        s << "  <line x1=\"" << c << "\" y1=\"" << c << "\" x2=\"" << x << "\" y2=\"" << y
          << "\" stroke=\"" << fate_color(b.fate_pos) << "\" stroke-width=\"2\"/>\n";
        s << "  <circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"4\" fill=\""
          << fate_color(b.fate_pos) << "\"/>\n";
    }
    s << "  <circle cx=\"" << c << "\" cy=\"" << c << "\" r=\"3\" fill=\"#000000\"/>\n";
    s << "  <text x=\"8\" y=\"" << size_px - 10
      << "\" font-family=\"monospace\" font-size=\"12\">t&gt;0 tangents at theta0=" << pred.theta0
      << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

std::string circle_plot_svg(const EigenPathSet& paths, int size_px) {
    const double c = size_px / 2.0;
    const double R = 0.35 * size_px;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_px << "\" height=\""
      << size_px << "\" viewBox=\"0 0 " << size_px << " " << size_px << "\">\n";
    s << "  <circle cx=\"" << c << "\" cy=\"" << c << "\" r=\"" << R
      << "\" fill=\"none\" stroke=\"#bbbbbb\"/>\n";
    for (const auto& p : paths.paths) {
        for (const auto& sample : p.samples) {
            const double x = c + R * sample.value.real();
            const double y = c - R * sample.value.imag();
            const char* col = "#7f7f7f";
            if (sample.on_circle)
                col = sample.cluster_signature.positive_definite()   ? "#d62728"
                      : sample.cluster_signature.negative_definite() ? "#1f77b4"
                                                                     : "#9467bd";
            s << "  <circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"1.5\" fill=\"" << col
              << "\"/>\n";
        }
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace bifurc
