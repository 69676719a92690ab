#include "bifurc/flow.hpp"

#include <cmath>

namespace bifurc {

namespace {

Mat rhs(const HamiltonianCurve& curve, const Mat& J, double t) {
    Mat a = curve.evaluate(t);
    if (!a.allFinite())
        throw NumericalError("non-finite coefficient matrix A(t) at t = " + std::to_string(t));
    return J * a;
}

// One classical RK4 step for dg/dt = J A(t) g.
Mat rk4_step(const HamiltonianCurve& curve, const Mat& J, const Mat& g, double t, double h) {
    const Mat k1 = rhs(curve, J, t) * g;
    const Mat k2 = rhs(curve, J, t + 0.5 * h) * (g + 0.5 * h * k1);
    const Mat k3 = rhs(curve, J, t + 0.5 * h) * (g + 0.5 * h * k2);
    const Mat k4 = rhs(curve, J, t + h) * (g + h * k3);
    return g + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
}

// Tangent correction toward gamma^T J gamma = J; one Newton step per
// iteration.
Mat reproject_symplectic(Mat g, const Mat& J, double tol, int max_iter = 8) {
    for (int it = 0; it < max_iter; ++it) {
        const Mat E = g.transpose() * J * g - J;
        if (E.norm() <= tol) break;
        g = g * (Mat::Identity(g.rows(), g.cols()) + 0.5 * J * E);
    }
    return g;
}

}  // namespace

FlowResult propagate(const HamiltonianCurve& curve, const SymplecticMatrix& gamma0,
                     const std::vector<double>& grid, const PropagateOptions& opts) {
    if (grid.size() < 1) throw ContractError("propagate: empty grid");
    const bool increasing = grid.size() < 2 || grid[1] > grid[0];
    for (size_t i = 1; i < grid.size(); ++i) {
        const bool ok = increasing ? grid[i] > grid[i - 1] : grid[i] < grid[i - 1];
        if (!ok) throw ContractError("propagate: grid must be strictly monotone");
    }
    if (gamma0.dim() != curve.dim()) throw ContractError("propagate: dimension mismatch");

    const Mat J = standard_J(curve.dim());
    FlowResult out;
    out.times = grid;
    out.gammas.reserve(grid.size());
    out.gammas.push_back(gamma0.value);
    out.step_error.assign(grid.size(), 0.0);
    out.drift.assign(grid.size(), symplectic_residual(gamma0.value));

    Mat g = gamma0.value;
    double err_acc = 0.0;
    double drift_max = out.drift[0];

    for (size_t k = 1; k < grid.size(); ++k) {
        double t = grid[k - 1];
        const double t_end = grid[k];
        const double dir = (t_end > t) ? 1.0 : -1.0;
        double h = dir * std::min(std::abs(t_end - t), opts.max_step);

        while (dir * (t_end - t) > 0.0) {
            if (std::abs(h) > std::abs(t_end - t)) h = t_end - t;
            const Mat full = rk4_step(curve, J, g, t, h);
            const Mat half1 = rk4_step(curve, J, g, t, 0.5 * h);
            const Mat half2 = rk4_step(curve, J, half1, t + 0.5 * h, 0.5 * h);
            const double est = (half2 - full).norm() / 15.0;
            const double budget = opts.tol * std::abs(h);
            if (est <= budget || std::abs(h) <= 1e-14 * std::max(1.0, std::abs(t))) {
                g = half2;
                t += h;
                err_acc += est;
                // grow cautiously
                const double grow = (est > 0.0) ? 0.9 * std::pow(budget / est, 0.25) : 2.0;
                h *= std::min(2.0, std::max(0.5, grow));
                if (std::abs(h) > opts.max_step) h = dir * opts.max_step;
            } else {
                h *= std::max(0.1, 0.9 * std::pow(budget / est, 0.25));
            }
        }

        double d = symplectic_residual(g);
        if (d > opts.reproject_factor * opts.tol) {
            g = reproject_symplectic(std::move(g), J, opts.tol);
            out.reprojected = true;
            out.reprojection_nodes.push_back(static_cast<int>(k));
            d = symplectic_residual(g);
        }
        drift_max = std::max(drift_max, d);
        out.gammas.push_back(g);
        out.step_error[k] = err_acc;
        out.drift[k] = drift_max;
    }
    return out;
}

Mat propagate_to(const HamiltonianCurve& curve, const Mat& gamma0, double t0, double t1,
                 const PropagateOptions& opts) {
    if (t0 == t1) return gamma0;
    const auto res = propagate(curve, SymplecticMatrix::unchecked(gamma0), {t0, t1}, opts);
    return res.gammas.back();
}

}  // namespace bifurc
