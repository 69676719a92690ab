#include "bifurc/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bifurc {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

int Spectrum::total_multiplicity() const {
    int n = 0;
    for (const auto& c : clusters) n += c.multiplicity;
    return n;
}

const EigenCluster& Spectrum::nearest(Complex z) const {
    if (clusters.empty()) throw ContractError("Spectrum::nearest on empty spectrum");
    size_t best = 0;
    double d = std::abs(clusters[0].value - z);
    for (size_t i = 1; i < clusters.size(); ++i) {
        const double di = std::abs(clusters[i].value - z);
        if (di < d) {
            d = di;
            best = i;
        }
    }
    return clusters[best];
}

double default_on_circle_tol(const Mat& gamma) { return 1e-8 + 1e-6 * gamma.norm(); }

Spectrum eigen_decompose(const Mat& gamma, double cluster_tol) {
    if (!gamma.allFinite()) throw ContractError("eigen_decompose: non-finite matrix");
    require_even_dim(gamma, "eigen_decompose");
    if (cluster_tol <= 0.0) cluster_tol = 1e-6 * std::max(1.0, gamma.norm());

    Eigen::EigenSolver<Mat> solver(gamma, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericalError("eigen_decompose: solver failed");
    CVec vals = solver.eigenvalues();

    // deterministic ordering: principal argument, then modulus
    std::vector<Complex> eig(vals.data(), vals.data() + vals.size());
    std::sort(eig.begin(), eig.end(), [](Complex a, Complex b) {
        const double aa = std::arg(a), ab = std::arg(b);
        if (aa != ab) return aa < ab;
        return std::abs(a) < std::abs(b);
    });

    const int n = static_cast<int>(eig.size());
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(eig[static_cast<size_t>(i)] - eig[static_cast<size_t>(j)]) <= cluster_tol)
                uf.unite(i, j);

    Spectrum out;
    out.cluster_tol = cluster_tol;
    out.eigenvalues = eig;
    std::vector<int> root_to_cluster(static_cast<size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        const int r = uf.find(i);
        if (root_to_cluster[static_cast<size_t>(r)] < 0) {
            root_to_cluster[static_cast<size_t>(r)] = static_cast<int>(out.clusters.size());
            EigenCluster c;
            c.id = root_to_cluster[static_cast<size_t>(r)];
            out.clusters.push_back(c);
        }
        auto& c = out.clusters[static_cast<size_t>(root_to_cluster[static_cast<size_t>(r)])];
        c.members.push_back(eig[static_cast<size_t>(i)]);
        c.multiplicity += 1;
    }
    for (auto& c : out.clusters) {
        Complex sum = 0.0;
        for (auto m : c.members) sum += m;
        c.value = sum / static_cast<double>(c.multiplicity);
    }
    return out;
}

std::vector<std::vector<int>> quadruple_partners(const Spectrum& spec, double tol) {
    const int k = static_cast<int>(spec.clusters.size());
    UnionFind uf(k);

    auto find_partner = [&](Complex target) -> int {
        int best = -1;
        double bestd = tol;
        for (int i = 0; i < k; ++i) {
            const double d = std::abs(spec.clusters[static_cast<size_t>(i)].value - target);
            if (d <= bestd) {
                bestd = d;
                best = i;
            }
        }
        return best;
    };

    for (int i = 0; i < k; ++i) {
        const Complex v = spec.clusters[static_cast<size_t>(i)].value;
        for (const Complex target : {std::conj(v), 1.0 / std::conj(v)}) {
            const int j = find_partner(target);
            if (j < 0)
                throw StructureError(
                    "quadruple_partners: spectrum not closed under conjugation/reflection near (" +
                    std::to_string(v.real()) + ", " + std::to_string(v.imag()) + ")");
            uf.unite(i, j);
        }
    }

    std::vector<std::vector<int>> groups;
    std::vector<int> root_to_group(static_cast<size_t>(k), -1);
    for (int i = 0; i < k; ++i) {
        const int r = uf.find(i);
        if (root_to_group[static_cast<size_t>(r)] < 0) {
            root_to_group[static_cast<size_t>(r)] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<size_t>(root_to_group[static_cast<size_t>(r)])].push_back(i);
    }
    return groups;
}

}  // namespace bifurc
