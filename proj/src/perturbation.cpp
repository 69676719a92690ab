#include "bifurc/flow.hpp"

#include <cmath>

namespace bifurc {

namespace {

// Composite Simpson of g(t)^T dA/deps(t) g(t) over [0, T] with `panels`
// panels; the flow is integrated once over all quadrature nodes.
Mat quadrature_C(const HamiltonianCurve& family, double T, double eps, int panels,
                 const PropagateOptions& opts) {
    const int dim = family.dim();
    std::vector<double> nodes;
    nodes.reserve(static_cast<size_t>(2 * panels + 1));
    for (int i = 0; i <= 2 * panels; ++i) nodes.push_back(T * static_cast<double>(i) / (2.0 * panels));

    // Flow at fixed eps, gamma(0, eps) = Id, integrated across the
    // quadrature nodes with fixed RK4 substeps.
    const Mat J = standard_J(dim);
    Mat g = Mat::Identity(dim, dim);
    std::vector<Mat> gam;
    gam.reserve(nodes.size());
    gam.push_back(g);

    auto rhs = [&](double t, const Mat& m) -> Mat { return J * family.evaluate(t, eps) * m; };
    // fixed fine substeps per quadrature interval, classical RK4; the
    // interval count is driven by opts.tol through a conservative bound
    const double h_node = T / (2.0 * panels);
    int sub = 1;
    {
        // aim local error ~ h^5 below tol * h
        const double target = std::max(opts.tol, 1e-14);
        while (sub < 64 && std::pow(h_node / sub, 4) > target) ++sub;
    }
    for (size_t i = 1; i < nodes.size(); ++i) {
        double t = nodes[i - 1];
        const double h = (nodes[i] - nodes[i - 1]) / sub;
        for (int s = 0; s < sub; ++s) {
            const Mat k1 = rhs(t, g);
            const Mat k2 = rhs(t + 0.5 * h, g + 0.5 * h * k1);
            const Mat k3 = rhs(t + 0.5 * h, g + 0.5 * h * k2);
            const Mat k4 = rhs(t + h, g + h * k3);
            g += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
            t += h;
        }
        gam.push_back(g);
    }

    auto integrand = [&](size_t i) -> Mat {
        const Mat dA = family.eps_derivative(nodes[i]);
        return gam[i].transpose() * dA * gam[i];
    };

    Mat acc = Mat::Zero(dim, dim);
    const double h = T / panels;
    for (int p = 0; p < panels; ++p) {
        const size_t i0 = static_cast<size_t>(2 * p);
        acc += (h / 6.0) * (integrand(i0) + 4.0 * integrand(i0 + 1) + integrand(i0 + 2));
    }
    return 0.5 * (acc + acc.transpose());
}

Mat endpoint_gamma(const HamiltonianCurve& family, double T, double eps,
                   const PropagateOptions& opts) {
    const int dim = family.dim();
    const Mat J = standard_J(dim);
    auto rhs = [&](double t, const Mat& m) -> Mat { return J * family.evaluate(t, eps) * m; };
    Mat g = Mat::Identity(dim, dim);
    int steps = 64;
    const double target = std::max(opts.tol, 1e-14);
    while (steps < 100000 && std::pow(std::abs(T) / steps, 4) > target) steps *= 2;
    const double h = T / steps;
    double t = 0.0;
    for (int s = 0; s < steps; ++s) {
        const Mat k1 = rhs(t, g);
        const Mat k2 = rhs(t + 0.5 * h, g + 0.5 * h * k1);
        const Mat k3 = rhs(t + 0.5 * h, g + 0.5 * h * k2);
        const Mat k4 = rhs(t + h, g + h * k3);
        g += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
        t += h;
    }
    return g;
}

}  // namespace

PerturbationMatrices perturbation_matrices(const HamiltonianCurve& family, double T, double eps,
                                           int quad_steps, const PropagateOptions& opts) {
    if (!(T > 0)) throw ContractError("perturbation_matrices: T must be positive");
    if (quad_steps < 1) throw ContractError("perturbation_matrices: quad_steps must be >= 1");

    PerturbationMatrices out;
    out.T = T;
    out.eps = eps;

    out.C = quadrature_C(family, T, eps, quad_steps, opts);
    const Mat C_refined = quadrature_C(family, T, eps, 2 * quad_steps, opts);
    out.refinement_delta = (C_refined - out.C).norm();
    out.C = C_refined;  // keep the refined value

    const Mat gT = endpoint_gamma(family, T, eps, opts);
    const Mat gT_inv = gT.inverse();
    out.B = gT_inv.transpose() * out.C * gT_inv;
    out.B = 0.5 * (out.B + Mat(out.B.transpose()));

    // First form -g^T J d_eps g by central difference in eps.
    const double h = std::max(1e-6, 1e-6 * std::abs(eps));
    const Mat gp = endpoint_gamma(family, T, eps + h, opts);
    const Mat gm = endpoint_gamma(family, T, eps - h, opts);
    const Mat deps = (gp - gm) / (2.0 * h);
    const Mat J = standard_J(family.dim());
    Mat C_fd = -gT.transpose() * J * deps;
    out.C_difference = 0.5 * (C_fd + Mat(C_fd.transpose()));
    out.discrepancy = (out.C - out.C_difference).norm();

    const double scale = std::max(1.0, out.C.norm());
    out.converged = out.refinement_delta <= 1e-6 * scale && out.discrepancy <= 1e-4 * scale;
    return out;
}

}  // namespace bifurc
