#include "bifurc/jordan.hpp"
#include "bifurc/krein.hpp"

#include "support/planted.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace bifurc;
using namespace bifurc::testsupport;

namespace {

// independent oracle for phi: smallest cardinality of any subset of blocks
// whose total size reaches N - k
int phi_bruteforce(int k, const std::vector<int>& sizes) {
    const int m = static_cast<int>(sizes.size());
    int N = 0;
    for (int v : sizes) N += v;
    if (k >= N) return 0;
    int best = m;
    for (int mask = 1; mask < (1 << m); ++mask) {
        int total = 0, count = 0;
        for (int i = 0; i < m; ++i)
            if (mask & (1 << i)) {
                total += sizes[static_cast<size_t>(i)];
                ++count;
            }
        if (total >= N - k) best = std::min(best, count);
    }
    return best;
}

std::vector<int> random_partition(std::mt19937_64& rng, int max_total) {
    std::uniform_int_distribution<int> d(1, max_total);
    int remaining = d(rng);
    std::vector<int> parts;
    while (remaining > 0) {
        std::uniform_int_distribution<int> p(1, remaining);
        parts.push_back(p(rng));
        remaining -= parts.back();
    }
    std::sort(parts.rbegin(), parts.rend());
    return parts;
}

}  // namespace

TEST_CASE("block_grouping: worked example and edge cases") {
    auto g = block_grouping({4, 2, 2, 1});
    CHECK(g.s == 3);
    CHECK(g.n == std::vector<int>{4, 2, 1});
    CHECK(g.m == std::vector<int>{1, 2, 1});
    CHECK(g.total_blocks() == 4);
    CHECK(g.total_size() == 9);

    g = block_grouping({1, 1});
    CHECK(g.s == 1);
    CHECK(g.n == std::vector<int>{1});
    CHECK(g.m == std::vector<int>{2});

    g = block_grouping({3, 3, 3});
    CHECK(g.s == 1);
    CHECK(g.n == std::vector<int>{3});
    CHECK(g.m == std::vector<int>{3});

    CHECK_THROWS_AS(block_grouping({1, 2}), ContractError);
}

TEST_CASE("phi: stated values for sizes (4,2,2,1)") {
    const std::vector<int> sizes{4, 2, 2, 1};
    CHECK(phi(1, sizes) == 3);
    CHECK(phi(3, sizes) == 2);
    CHECK(phi(5, sizes) == 1);
    CHECK(phi(0, sizes) == 4);  // all four blocks reach N - 0 = 9
    for (int k = 9; k <= 18; ++k) CHECK(phi(k, sizes) == 0);
}

TEST_CASE("phi: agrees with the subset-minimizer oracle") {
    const std::vector<int> example{4, 2, 2, 1};
    for (int k = 0; k <= 18; ++k) CHECK(phi(k, example) == phi_bruteforce(k, example));

    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto sizes = random_partition(rng, 12);
        int N = 0;
        for (int v : sizes) N += v;
        for (int k = 0; k <= N + 2; ++k) CHECK(phi(k, sizes) == phi_bruteforce(k, sizes));
    }
}

TEST_CASE("phi: monotone staircase with unit drops and block-run structure") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto sizes = random_partition(rng, 12);
        const auto g = block_grouping(sizes);
        int N = 0;
        for (int v : sizes) N += v;
        CHECK(phi(0, sizes) == static_cast<int>(sizes.size()));
        for (int k = 1; k <= N; ++k) {
            const int d = phi(k - 1, sizes) - phi(k, sizes);
            CHECK(phi(k, sizes) <= phi(k - 1, sizes));
            CHECK((d == 0 || d == 1));
        }
        // black points: at k_l = sum_{l' > l} m n, phi = sum_{l' <= l} m,
        // dropping by one every n_l inside the group's run
        for (int l = 0; l < g.s; ++l) {
            int k_l = 0;
            for (int lp = l + 1; lp < g.s; ++lp)
                k_l += g.m[static_cast<size_t>(lp)] * g.n[static_cast<size_t>(lp)];
            int expected = 0;
            for (int lp = 0; lp <= l; ++lp) expected += g.m[static_cast<size_t>(lp)];
            CHECK(phi(k_l, sizes) == expected);
            for (int u = 0; u <= g.m[static_cast<size_t>(l)]; ++u)
                CHECK(phi(k_l + u * g.n[static_cast<size_t>(l)], sizes) == expected - u);
        }
    }
}

TEST_CASE("weyr_sizes: Segre duality on random nilpotent matrices up to size 8") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 1);
    for (int trial = 0; trial < 30; ++trial) {
        auto sizes = random_partition(rng, 8);
        int n = 0;
        for (int v : sizes) n += v;
        Mat nil = Mat::Zero(n, n);
        int off = 0;
        for (int sz : sizes) {
            for (int j = 1; j < sz; ++j) nil(off + j - 1, off + j) = 1.0;
            off += sz;
        }
        Mat sim(n, n);
        do {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) sim(i, j) = g(rng);
        } while (std::abs(sim.determinant()) < 0.3);
        const Mat m = sim * nil * sim.inverse();
        CHECK(weyr_sizes(m, Complex(0, 0), 1e-9) == sizes);
    }
}

TEST_CASE("weyr_sizes: ambiguous rank gap raises StructureError") {
    Mat m = Mat::Zero(3, 3);
    m(0, 0) = 1.0;
    m(1, 1) = 2e-6;
    m(2, 2) = 5e-7;  // straddles tol * sigma_max = 1e-6 within factor 4
    CHECK_THROWS_AS(weyr_sizes(m, Complex(0, 0), 1e-6), StructureError);
}

TEST_CASE("jordan_chains: shear at lambda0 = 1") {
    Mat shear(2, 2);
    shear << 1, 1, 0, 1;
    const auto chains = jordan_chains(shear, Complex(1, 0));
    CHECK(chains.sizes == std::vector<int>{2});
    CHECK(chains.N == 2);
    CHECK(chains.grouping.s == 1);
    // eigenvector end parallel to (1, 0)
    const CVec& xi11 = chains.chains[0][0];
    CHECK(std::abs(xi11(1)) <= 1e-10);
    CHECK(std::abs(xi11(0)) == doctest::Approx(1.0).epsilon(1e-10));
    // chain relation: gamma xi_2 = xi_2 - xi_1
    const CVec& xi12 = chains.chains[0][1];
    CHECK((shear.cast<Complex>() * xi12 - xi12 + xi11).norm() <= 1e-10);
    CHECK(chains.chain_residual <= 1e-10);
    CHECK(chains.basis_sigma_min > 1e-6);
}

TEST_CASE("jordan_chains: identity has 2n simple chains") {
    const auto chains = jordan_chains(Mat::Identity(4, 4), Complex(1, 0));
    CHECK(chains.sizes == std::vector<int>{1, 1, 1, 1});
    CHECK(chains.N == 4);
}

TEST_CASE("jordan_chains: simple rotation eigenvalue") {
    const auto chains = jordan_chains(rotation2(0.3), std::polar(1.0, 0.3));
    CHECK(chains.sizes == std::vector<int>{1});
    CHECK(chains.N == 1);
}

TEST_CASE("jordan_chains: rejects non-eigenvalues and off-circle targets") {
    CHECK_THROWS_AS(jordan_chains(rotation2(0.3), Complex(0, 1)), ContractError);
    Mat hyp = Mat::Zero(2, 2);
    hyp(0, 0) = 2.0;
    hyp(1, 1) = 0.5;
    CHECK_THROWS_AS(jordan_chains(hyp, Complex(2, 0)), ContractError);
}

TEST_CASE("eta_chains: shear scaling and norm preservation") {
    Mat shear(2, 2);
    shear << 1, 1, 0, 1;
    const auto chains = jordan_chains(shear, Complex(1, 0));
    const auto etas = eta_chains(chains);
    // eta_{1,1} = -i xi_{1,1}, eta_{1,2} = -xi_{1,2}
    CHECK((etas.chains[0][0] - Complex(0, -1) * chains.chains[0][0]).norm() <= 1e-14);
    CHECK((etas.chains[0][1] + chains.chains[0][1]).norm() <= 1e-14);
    for (size_t i = 0; i < chains.chains.size(); ++i)
        for (size_t j = 0; j < chains.chains[i].size(); ++j)
            CHECK(etas.chains[i][j].norm() ==
                  doctest::Approx(chains.chains[i][j].norm()).epsilon(1e-14));
}

TEST_CASE("eta_chains: theta0 = pi/2 with j = 1 leaves the vector unchanged") {
    const auto chains = jordan_chains(rotation2(M_PI / 2), Complex(0, 1));
    const auto etas = eta_chains(chains);
    // (-i e^{i pi/2})^1 = (-i)(i) = 1
    CHECK((etas.chains[0][0] - chains.chains[0][0]).norm() <= 1e-14);
}

TEST_CASE("planted structures: staircase recovers the planted sizes") {
    const std::vector<std::vector<int>> partitions{{2}, {1, 1}, {3}, {2, 1}, {2, 2}, {3, 2}, {4, 1, 1}};
    int idx = 0;
    for (const auto& sizes : partitions) {
        const double theta0 = 0.5 + 0.3 * (idx % 5);
        const auto inst = planted_symplectic(sizes, theta0, 1000u + static_cast<unsigned>(idx));
        REQUIRE(inst.build_residual <= 1e-9);
        const auto chains = jordan_chains(inst.gamma, inst.lambda0);
        CHECK(chains.sizes == sizes);
        CHECK(chains.chain_residual <= 1e-8);
        ++idx;
    }
}

TEST_CASE("planted structures: chain Gram relations of the eta vectors") {
    // zero when j + j' <= max(j_i, j_{i'}); constant along
    // j + j' = max(j_i, j_{i'}) + 1
    const std::vector<std::vector<int>> partitions{{2}, {3}, {2, 2}, {3, 1}, {2, 1}};
    int idx = 0;
    for (const auto& sizes : partitions) {
        const auto inst =
            planted_symplectic(sizes, 0.7 + 0.25 * idx, 2000u + static_cast<unsigned>(idx));
        const auto chains = jordan_chains(inst.gamma, inst.lambda0);
        const auto etas = eta_chains(chains);
        const int m = static_cast<int>(etas.chains.size());
        for (int i = 0; i < m; ++i)
            for (int ip = 0; ip < m; ++ip) {
                const int ji = etas.sizes[static_cast<size_t>(i)];
                const int jip = etas.sizes[static_cast<size_t>(ip)];
                const int mx = std::max(ji, jip);
                Complex antidiag;
                bool have = false;
                for (int j = 1; j <= ji; ++j)
                    for (int jp = 1; jp <= jip; ++jp) {
                        const Complex v =
                            krein_pair(etas.chains[static_cast<size_t>(i)][static_cast<size_t>(j - 1)],
                                       etas.chains[static_cast<size_t>(ip)][static_cast<size_t>(jp - 1)]);
                        if (j + jp <= mx) CHECK(std::abs(v) <= 1e-6);
                        if (j + jp == mx + 1) {
                            if (have) CHECK(std::abs(v - antidiag) <= 1e-6);
                            antidiag = v;
                            have = true;
                        }
                    }
            }
        ++idx;
    }
}

TEST_CASE("jordan_chains: pivot twist changes chains but not sizes") {
    const auto inst = planted_symplectic({2, 1}, 1.1, 77u);
    const auto base = jordan_chains(inst.gamma, inst.lambda0);
    JordanOptions opts;
    opts.pivot_seed = 5;
    const auto twisted = jordan_chains(inst.gamma, inst.lambda0, opts);
    CHECK(base.sizes == twisted.sizes);
    double diff = 0.0;
    for (size_t i = 0; i < base.chains.size(); ++i)
        diff += (base.chains[i][0] - twisted.chains[i][0]).norm();
    CHECK(diff > 1e-6);
}
