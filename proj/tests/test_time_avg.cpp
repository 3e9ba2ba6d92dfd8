#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "hamflex/errors.hpp"
#include "hamflex/flow.hpp"
#include "hamflex/time_avg.hpp"
#include "helpers.hpp"

using namespace hamflex;
using namespace hamflex::testing;

static GridSpec grid64() { return GridSpec{-4, 4, -4, 4, 64, 64}; }

// ---------------------------------------------------------------------------
// Reparametrizing bumps
// ---------------------------------------------------------------------------

TEST_CASE("bump profile: unit integral and deviation bound for N up to 16") {
    for (int N : {1, 2, 4, 8, 16}) {
        for (int i = 1; i <= N; ++i) {
            TimeProfile p = bump_profile(N, i, 64);
            CHECK(p.N == N);
            CHECK(p.interval == i);
            // Unit integral after the internal rescale.
            CHECK(p.integral() == doctest::Approx(1.0).epsilon(1e-12));
            // Deviation integral strictly under 1/N^2.
            CHECK(p.deviation_integral() < 1.0 / (double(N) * N));
            // Nonnegative, vanishing at the interval endpoints, plateau
            // above N (the profile must overshoot the constant N to keep a
            // unit integral with zero endpoints).
            double mx = 0;
            for (double v : p.values) {
                CHECK(v >= 0.0);
                mx = std::max(mx, v);
            }
            CHECK(p.values.front() == 0.0);
            CHECK(p.values.back() == 0.0);
            CHECK(mx > N);
        }
    }
}

TEST_CASE("bump profile: interval bookkeeping") {
    TimeProfile p = bump_profile(4, 3, 64);
    CHECK(p.t0() == doctest::Approx(0.5));
    CHECK(p.t1() == doctest::Approx(0.75));
}

TEST_CASE("bump profile: rejects bad arguments") {
    CHECK_THROWS_AS(bump_profile(4, 0, 64), SpecMismatch);
    CHECK_THROWS_AS(bump_profile(4, 5, 64), SpecMismatch);
    CHECK_THROWS_AS(bump_profile(0, 1, 64), SpecMismatch);
    CHECK_THROWS_AS(bump_profile(4, 1, 16), CannotMeetTolerance);
}

// ---------------------------------------------------------------------------
// Mean normalization
// ---------------------------------------------------------------------------

// Frame along the box boundary, away from the interior bump supports.
static CellSet boundary_frame(const GridSpec& s) {
    CellSet outer = CellSet::from_rect(s, -3.9, 3.9, -3.9, 3.9);
    CellSet inner = CellSet::from_rect(s, -2.95, 2.95, -2.95, 2.95);
    return outer.intersect(inner.complement());
}

TEST_CASE("normalize_mean: slice means cancel, norms preserved, chi valid") {
    GridSpec s = grid64();
    CellSet frame = boundary_frame(s);
    for (unsigned seed = 1; seed <= 20; ++seed) {
        TimeField H = random_time_field(s, seed, 65);
        auto [G, w] = normalize_mean(H, frame);

        // chi has unit integral and stays below 1 / Vol(union support).
        double chi_int = mean(w.chi);
        CHECK(chi_int == doctest::Approx(1.0).epsilon(1e-12));
        CellSet supp(s);
        for (const GridField& f : H.fields)
            supp = supp.unite(support_cells(f));
        CHECK(sup_norm(w.chi) < 1.0 / supp.volume());
        CHECK(supp.disjoint_from(support_cells(w.chi)));

        for (int k = 0; k < G.num_samples(); ++k) {
            // Integral of each slice is zero.
            CHECK(std::fabs(mean(G.fields[k])) < 1e-8);
            // Witness a(t) records the original slice integral.
            CHECK(w.a[k] ==
                  doctest::Approx(mean(H.fields[k]))
                      .epsilon(1e-12));
            // Sup norm of every slice is preserved (the absorber is far
            // below the field amplitude).
            CHECK(sup_norm(G.fields[k]) ==
                  doctest::Approx(sup_norm(H.fields[k])).epsilon(1e-9));
        }
        CHECK(l1inf_norm(G) == doctest::Approx(l1inf_norm(H)).epsilon(1e-10));
    }
}

TEST_CASE("normalize_mean: rejects overlapping or undersized regions") {
    GridSpec s = grid64();
    TimeField H = random_time_field(s, 3, 65);
    CellSet overlapping = CellSet::from_rect(s, -3, 3, -3, 3);
    CHECK_THROWS_AS(normalize_mean(H, overlapping), RegionOverlap);
    CellSet tiny = CellSet::from_rect(s, 3.2, 3.4, 3.2, 3.4);
    CHECK_THROWS_AS(normalize_mean(H, tiny), VolumeTooSmall);
}

// ---------------------------------------------------------------------------
// Discretization into autonomous pieces
// ---------------------------------------------------------------------------

// G(t, x) = t * f(x) with zero-mean f: every piece has the closed form
// g_i = (t_{i+1}^2 - t_i^2) / 2 * f, exactly reproduced by the trapezoid
// rule because the modulation is linear in t.
TEST_CASE("discretize: linear-in-time field matches the closed form") {
    GridSpec s = grid64();
    GridField f = admissible_zero_mean(s, 11, 0.6);
    const int N = 4, T = 4 * 64 + 1;
    TimeField G(s, T);
    for (int k = 0; k < T; ++k) {
        double t = G.t_of(k);
        for (int i = 0; i < s.num_cells(); ++i) G.fields[k][i] = t * f[i];
    }
    DiscretizationCertificate cert = discretize(G, N);
    REQUIRE(cert.N == N);
    REQUIRE((int)cert.g.size() == N);
    for (int i = 0; i < N; ++i) {
        double t0 = double(i) / N, t1 = double(i + 1) / N;
        double coef = 0.5 * (t1 * t1 - t0 * t0);
        for (int idx = 0; idx < s.num_cells(); ++idx)
            CHECK(cert.g[i][idx] == doctest::Approx(coef * f[idx]).epsilon(1e-12));
        CHECK(sup_norm(cert.g[i]) ==
              doctest::Approx(coef * sup_norm(f)).epsilon(1e-12));
    }
    // Certified bounds hold with the certificate's own constants.
    CHECK(cert.k_l1inf <= cert.k_bound + 10.0 / T);
    CHECK(cert.sum_g_sup <= cert.sum_bound + 10.0 / T);
    // C' for this family is ||f||_inf (attained at t = 1).
    CHECK(cert.c_sup == doctest::Approx(sup_norm(f)).epsilon(1e-12));
}

TEST_CASE("discretize: error generator shrinks like 1/N") {
    GridSpec s = grid64();
    const int T = 16 * 64 + 1;
    TimeField H = random_time_field(s, 7, T, 0.4);
    // Make every slice zero-mean via the boundary absorber.
    auto [G, w] = normalize_mean(H, boundary_frame(s));
    std::vector<double> ks;
    for (int N : {2, 4, 8, 16}) {
        DiscretizationCertificate cert = discretize(G, N);
        CHECK(cert.k_l1inf <= cert.k_bound + 10.0 / T);
        ks.push_back(cert.k_l1inf);
    }
    // Monotone-in-N decline over the 8x sweep.
    CHECK(ks.back() < ks.front());
    CHECK(ks.back() < 0.5 * ks.front());
}

TEST_CASE("discretize: piecewise flow factorizes into autonomous time-1 maps") {
    GridSpec s = grid64();
    GridField f = admissible_zero_mean(s, 5, 0.35);
    const int N = 2, T = 2 * 64 + 1;
    TimeField G(s, T);
    for (int k = 0; k < T; ++k) {
        double t = G.t_of(k);
        double wgt = 0.5 + 0.5 * std::sin(2 * M_PI * t);
        for (int i = 0; i < s.num_cells(); ++i) G.fields[k][i] = wgt * f[i];
    }
    DiscretizationCertificate cert = discretize(G, N);
    // The reparametrized flow over interval I_i is the time-1 flow of the
    // autonomous piece g_i, so the full flow is their ordered product.
    FlowMap full = integrate(cert.g_tilde, 4 * (T - 1));
    FlowMap p0 = integrate(cert.g[0], 128);
    FlowMap p1 = integrate(cert.g[1], 128);
    FlowMap prod = group_product({&p1, &p0});  // g_0 applied first
    CHECK(map_distance(full, prod) < 2e-2);
}

TEST_CASE("discretize: rejects coarse or misaligned time grids") {
    GridSpec s = grid64();
    GridField f = admissible_zero_mean(s, 9, 0.5);
    auto tf = [&](int T) {
        TimeField G(s, T);
        for (int k = 0; k < T; ++k) {
            double t = G.t_of(k);
            for (int i = 0; i < s.num_cells(); ++i) G.fields[k][i] = t * f[i];
        }
        return G;
    };
    CHECK_THROWS_AS(discretize(tf(65), 4), TimeGridTooCoarse);   // 16 < 32 steps
    CHECK_THROWS_AS(discretize(tf(66), 4), TimeGridTooCoarse);   // not a refinement
    CHECK_THROWS_AS(discretize(tf(129), 0), SpecMismatch);
}

TEST_CASE("discretize: rejects a slice with nonzero mean") {
    GridSpec s = grid64();
    const int T = 65;
    TimeField G(s, T);
    GridField bump = make_bump(s, 0, 0, 1.0, 0.5);  // positive integral
    for (int k = 0; k < T; ++k) G.fields[k] = bump;
    CHECK_THROWS_AS(discretize(G, 2), HypothesisViolated);
}
