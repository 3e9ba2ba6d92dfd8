#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "hamflex/field.hpp"
#include "helpers.hpp"

using namespace hamflex;
using namespace hamflex::testing;

static GridSpec sym_grid(int n = 64, double half = 4.0) {
    return GridSpec{-half, half, -half, half, n, n};
}

TEST_CASE("sup_norm basics") {
    GridSpec s = sym_grid();
    GridField z(s);
    CHECK(sup_norm(z) == 0.0);

    GridField one_cell(s);
    one_cell[s.index(10, 20)] = 0.5;
    CHECK(sup_norm(one_cell) == 0.5);
}

TEST_CASE("sup_norm matches brute-force scan on sine-modulated bump") {
    GridSpec s{-M_PI, M_PI, -M_PI, M_PI, 128, 128};
    GridField f(s);
    for (int i = 0; i < s.num_cells(); ++i) {
        double x = s.cell_x(i), y = s.cell_y(i);
        double d = std::hypot(x, y);
        double bump = d < 2.5 ? std::pow(std::cos(0.5 * M_PI * d / 2.5), 2) : 0.0;
        f[i] = std::sin(x) * bump * (1.0 + 0.3 * std::cos(3 * y));
    }
    double oracle = 0.0;
    for (double v : f.values) oracle = std::max(oracle, std::abs(v));
    CHECK(sup_norm(f) == oracle);
}

TEST_CASE("l1_norm basics and counting measure") {
    GridSpec s = sym_grid();
    GridField z(s);
    CHECK(l1_norm(z) == 0.0);

    GridField ind(s);
    for (int k = 0; k < 7; ++k) ind[s.index(5 + k, 9)] = 1.0;
    CHECK(l1_norm(ind) == doctest::Approx(7.0 * s.cell_area()).epsilon(1e-14));
}

TEST_CASE("l1_norm agrees with refined-grid quadrature") {
    GridSpec coarse = sym_grid(64);
    GridSpec fine = sym_grid(128);
    auto smooth = [](double x, double y) {
        double d = std::hypot(x, y);
        return d < 3.0 ? std::cos(0.5 * M_PI * d / 3.0) * (1.5 + std::sin(x)) : 0.0;
    };
    GridField fc(coarse), ff(fine);
    for (int i = 0; i < coarse.num_cells(); ++i)
        fc[i] = smooth(coarse.cell_x(i), coarse.cell_y(i));
    for (int i = 0; i < fine.num_cells(); ++i)
        ff[i] = smooth(fine.cell_x(i), fine.cell_y(i));
    double lip = lipschitz_estimate(fc);
    double tol = 2.0 * coarse.cell_area() * lip * coarse.dx() * 64;
    CHECK(std::abs(l1_norm(fc) - l1_norm(ff)) < tol);
}

TEST_CASE("mean vanishes for odd-in-x fields on symmetric grids") {
    GridSpec s = sym_grid();
    GridField f(s);
    for (int i = 0; i < s.num_cells(); ++i) {
        double x = s.cell_x(i), y = s.cell_y(i);
        double d = std::hypot(x, y);
        f[i] = d < 3.0 ? x * std::cos(0.5 * M_PI * d / 3.0) : 0.0;
    }
    CHECK(std::abs(mean(f)) < 1e-12);
}

TEST_CASE("support_volume counts cells exactly") {
    GridSpec s = sym_grid();
    GridField ind(s);
    for (int k = 0; k < 11; ++k) ind[s.index(3 + k, 30)] = 2.0;
    CHECK(support_volume(ind) == doctest::Approx(11.0 * s.cell_area()).epsilon(1e-14));
}

TEST_CASE("truncated gaussian support volume close to analytic sublevel area") {
    GridSpec s = sym_grid(128);
    GridField f(s);
    f.support_tol = 1e-8;
    for (int i = 0; i < s.num_cells(); ++i) {
        double r2 = s.cell_x(i) * s.cell_x(i) + s.cell_y(i) * s.cell_y(i);
        double v = std::exp(-r2);
        f[i] = v > 1e-8 ? v : 0.0;
    }
    // Analytic region: exp(-r^2) > 1e-8, a disk of radius sqrt(ln 1e8).
    double r_star = std::sqrt(std::log(1e8));
    double analytic = M_PI * r_star * r_star;
    double ring = 2 * M_PI * r_star * 2 * std::max(s.dx(), s.dy());
    CHECK(std::abs(support_volume(f) - analytic) < ring + 4 * s.cell_area());
}

TEST_CASE("lin_comb identities") {
    GridSpec s = sym_grid();
    GridField f = random_smooth_field(s, 11);
    GridField diff = lin_comb({{1.0, &f}, {-1.0, &f}});
    CHECK(sup_norm(diff) == 0.0);

    GridField one(s);
    one[s.index(8, 8)] = 1.0;
    GridField twice = lin_comb({{2.0, &one}});
    CHECK(twice[s.index(8, 8)] == 2.0);
    CHECK(l1_norm(twice) == doctest::Approx(2.0 * s.cell_area()));
}

TEST_CASE("lin_comb matches naive per-cell loop bitwise") {
    GridSpec s = sym_grid();
    std::vector<GridField> fs;
    for (unsigned k = 0; k < 5; ++k) fs.push_back(random_smooth_field(s, 100 + k));
    std::vector<double> cs = {0.5, -1.25, 2.0, 0.125, -0.75};
    std::vector<std::pair<double, const GridField*>> terms;
    for (int k = 0; k < 5; ++k) terms.push_back({cs[k], &fs[k]});
    GridField got = lin_comb(terms);
    for (int i = 0; i < s.num_cells(); ++i) {
        double acc = 0.0;
        for (int k = 0; k < 5; ++k) acc += cs[k] * fs[k][i];
        CHECK(got[i] == acc);
    }
}

TEST_CASE("triangle inequality for sup_norm of combinations") {
    GridSpec s = sym_grid();
    for (unsigned seed = 0; seed < 10; ++seed) {
        GridField a = random_smooth_field(s, 200 + seed);
        GridField b = random_smooth_field(s, 300 + seed);
        double c1 = 0.3 + 0.1 * seed, c2 = -1.0 + 0.2 * seed;
        GridField comb = lin_comb({{c1, &a}, {c2, &b}});
        CHECK(sup_norm(comb) <=
              std::abs(c1) * sup_norm(a) + std::abs(c2) * sup_norm(b) + 1e-14);
    }
}

TEST_CASE("l1_norm invariant under cell permutation") {
    GridSpec s = sym_grid();
    GridField f = random_smooth_field(s, 42);
    std::vector<int> perm(s.num_cells());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937 rng(7);
    std::shuffle(perm.begin(), perm.end(), rng);
    GridField g(s);
    for (int i = 0; i < s.num_cells(); ++i) g[perm[i]] = f[i];
    CHECK(l1_norm(g) == doctest::Approx(l1_norm(f)).epsilon(1e-12));
}

TEST_CASE("mean is linear over combinations") {
    GridSpec s = sym_grid();
    GridField a = random_smooth_field(s, 5);
    GridField b = random_smooth_field(s, 6);
    GridField comb = lin_comb({{2.5, &a}, {-0.5, &b}});
    double lhs = mean(comb);
    double rhs = 2.5 * mean(a) - 0.5 * mean(b);
    CHECK(std::abs(lhs - rhs) < 1e-12 * 2);
}

TEST_CASE("grid file round-trip is bit exact") {
    GridSpec s = sym_grid(32);
    GridField f = random_smooth_field(s, 77);
    f.support_tol = 3.5e-7;
    std::filesystem::path p = std::filesystem::temp_directory_path() / "hx_rt.gf1";
    write_gf1_file(p.string(), f);
    GridField g = read_gf1_file(p.string());
    CHECK(g.spec.nx == s.nx);
    CHECK(g.support_tol == f.support_tol);
    for (int i = 0; i < s.num_cells(); ++i) CHECK(g[i] == f[i]);
    std::filesystem::remove(p);
}

TEST_CASE("time field file round-trip is bit exact") {
    GridSpec s = sym_grid(24);
    TimeField H = random_time_field(s, 9, 6);
    std::filesystem::path p = std::filesystem::temp_directory_path() / "hx_rt.tf1";
    write_tf1_file(p.string(), H);
    TimeField G = read_tf1_file(p.string());
    CHECK(G.fields.size() == H.fields.size());
    for (size_t k = 0; k < H.fields.size(); ++k)
        for (int i = 0; i < s.num_cells(); ++i)
            CHECK(G.fields[k][i] == H.fields[k][i]);
    std::filesystem::remove(p);
}

TEST_CASE("cell set operations: dilation, disjointness, rect and disk builders") {
    GridSpec s = sym_grid();
    CellSet r = CellSet::from_rect(s, -1, 1, -1, 1);
    CellSet d = CellSet::from_disk(s, 3, 3, 0.5);
    CHECK(r.disjoint_from(d));
    CellSet rd = r.dilate(1);
    CHECK(rd.volume() > r.volume());
    // A one-cell dilation adds exactly the ring of neighboring cells.
    int ring = rd.count() - r.count();
    CHECK(ring > 0);
    CHECK(rd.disjoint_from(d));
}

TEST_CASE("time norms: constant-in-time field gives equal L1-sup and unit scaling") {
    GridSpec s = sym_grid();
    GridField base = make_bump(s, 0, 0, 2.0, 0.7);
    TimeField H(s, 5);
    for (auto& g : H.fields) g = base;
    CHECK(l1inf_norm(H) == doctest::Approx(sup_norm(base)).epsilon(1e-12));
    CHECK(l11_norm(H) == doctest::Approx(l1_norm(base)).epsilon(1e-12));
}
