#pragma once

// Minimum-cost square assignment (Hungarian algorithm), used for
// eigenvalue path matching and branch-to-prediction pairing.

#include <vector>

namespace bifurc {

// cost is n x n row-major; returns col[i] = column assigned to row i.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace bifurc
