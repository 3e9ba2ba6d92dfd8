#include "hamflex/step_approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hamflex {

LinearWindow find_linear_window(const GridField& u, double l_min) {
    const GridSpec& s = u.spec;
    if (l_min <= 0) throw SpecMismatch("find_linear_window: l_min must be positive");

    double lo = *std::min_element(u.values.begin(), u.values.end());
    double hi = *std::max_element(u.values.begin(), u.values.end());
    double scale = 0.5 * (hi - lo);

    LinearWindow best;
    best.residual = std::numeric_limits<double>::infinity();

    std::vector<double> halves;
    for (double h = l_min / 2;
         h <= 0.5 * std::min(s.x_max - s.x_min, s.y_max - s.y_min); h *= 1.5)
        halves.push_back(h);
    if (halves.empty())
        throw NoWindow("find_linear_window: l_min exceeds the domain size");

    int stride = std::max(1, std::min(s.nx, s.ny) / 32);
    for (double h : halves) {
        for (int cy = 0; cy < s.ny; cy += stride) {
            for (int cx = 0; cx < s.nx; cx += stride) {
                double wx = s.x_min + (cx + 0.5) * s.dx();
                double wy = s.y_min + (cy + 0.5) * s.dy();
                if (wx - h < s.x_min || wx + h > s.x_max || wy - h < s.y_min ||
                    wy + h > s.y_max)
                    continue;
                int ix0 = static_cast<int>((wx - h - s.x_min) / s.dx());
                int ix1 = static_cast<int>((wx + h - s.x_min) / s.dx());
                int iy0 = static_cast<int>((wy - h - s.y_min) / s.dy());
                int iy1 = static_cast<int>((wy + h - s.y_min) / s.dy());
                ix1 = std::min(ix1, s.nx - 1);
                iy1 = std::min(iy1, s.ny - 1);
                double sum = 0;
                int cnt = 0;
                for (int iy = iy0; iy <= iy1; ++iy)
                    for (int ix = ix0; ix <= ix1; ++ix) {
                        int idx = s.index(ix, iy);
                        sum += u[idx] - s.cell_x(idx);
                        ++cnt;
                    }
                if (cnt == 0) continue;
                double c = sum / cnt;
                double resid = 0;
                for (int iy = iy0; iy <= iy1; ++iy)
                    for (int ix = ix0; ix <= ix1; ++ix) {
                        int idx = s.index(ix, iy);
                        resid = std::max(resid,
                                         std::fabs(u[idx] - s.cell_x(idx) - c));
                    }
                // Prefer larger windows among near-equal residuals.
                if (resid < best.residual - 1e-15 ||
                    (resid <= best.residual + 1e-15 &&
                     h > best.window.half_side)) {
                    best.window = Cube{wx, wy, h, -1};
                    best.c = c;
                    best.residual = resid;
                }
            }
        }
    }
    if (!(best.residual <= scale))
        throw NoWindow("find_linear_window: best residual " +
                       std::to_string(best.residual) +
                       " exceeds the value scale " + std::to_string(scale));
    return best;
}

namespace {

// Plateau profile on one cube: interior height 1 + d', collar at half
// height, d' solved so the cell-sum integral equals Vol(cube) exactly.
GridField plateau_profile(const GridSpec& s, const Cube& q, double delta) {
    CellSet cells = q.cells(s);
    std::vector<int> idxs = cells.cells();
    if (idxs.empty())
        throw CubeTooLarge("step profile: cube contains no cell centers");

    std::vector<int> interior, collar;
    for (int idx : idxs) {
        int ix = s.cell_ix(idx), iy = s.cell_iy(idx);
        bool edge = false;
        for (int d = 0; d < 4 && !edge; ++d) {
            int jx = ix + (d == 0) - (d == 1);
            int jy = iy + (d == 2) - (d == 3);
            if (jx < 0 || jx >= s.nx || jy < 0 || jy >= s.ny ||
                !cells.contains(s.index(jx, jy)))
                edge = true;
        }
        (edge ? collar : interior).push_back(idx);
    }
    double weight = interior.size() + 0.5 * collar.size();
    double h = q.volume() / (weight * s.cell_area());
    if (h > 1 + delta + 1e-12)
        throw CannotMeetTolerance(
            "step profile: required plateau height " + std::to_string(h) +
            " exceeds 1 + delta; cube too small for the grid");
    GridField F(s);
    F.support_tol = 0;
    for (int idx : interior) F[idx] = h;
    for (int idx : collar) F[idx] = 0.5 * h;
    return F;
}

} // namespace

StepApproxCertificate build_step_approx(const GridField& H,
                                        const std::vector<Cube>& cubes,
                                        double delta) {
    const GridSpec& s = H.spec;
    if (cubes.empty()) throw SpecMismatch("build_step_approx: no cubes");
    if (delta <= 0) throw SpecMismatch("build_step_approx: delta must be positive");
    if (!H.boundary_clear())
        throw HypothesisViolated("build_step_approx: H is not compactly supported");
    for (std::size_t i = 0; i < cubes.size(); ++i) {
        if (2 * cubes[i].half_side * std::sqrt(2.0) > delta + 1e-12)
            throw CubeTooLarge("build_step_approx: cube diameter exceeds delta");
        for (std::size_t j = i + 1; j < cubes.size(); ++j)
            if (cubes[i].intersects(cubes[j]))
                throw CubesOverlap("build_step_approx: cubes " + std::to_string(i) +
                                   " and " + std::to_string(j) + " overlap");
    }

    StepApproxCertificate cert;
    cert.cubes = cubes;
    cert.delta = delta;
    cert.h_sup = sup_norm(H);
    cert.c_lip = lipschitz_estimate(H);

    cert.K = GridField(s);
    CellSet covered(s);
    for (const Cube& q : cubes) {
        CellSet qc = q.cells(s);
        double sum = 0;
        int cnt = 0;
        for (int idx : qc.cells()) {
            sum += H[idx];
            ++cnt;
            covered.insert(idx);
        }
        double ci = cnt ? sum / cnt : 0.0;
        cert.c.push_back(ci);
        GridField Fi = plateau_profile(s, q, delta);
        for (int idx : qc.cells()) cert.K[idx] += ci * Fi[idx];
        cert.F.push_back(std::move(Fi));
    }

    CellSet supp = support_cells(H);
    CellSet uncovered(s);
    for (int idx : supp.cells())
        if (!covered.contains(idx)) uncovered.insert(idx);
    cert.uncovered_vol = uncovered.volume();
    double vol_u = supp.unite(covered).volume();

    double sup_d = 0, l1_d = 0;
    for (int idx = 0; idx < s.num_cells(); ++idx) {
        double d = std::fabs(H[idx] - cert.K[idx]);
        sup_d = std::max(sup_d, d);
        l1_d += d;
    }
    cert.eps_achieved_sup = sup_d;
    cert.eps_achieved_l1 = l1_d * s.cell_area();
    cert.leakage_bound = cert.uncovered_vol * cert.h_sup +
                         delta * vol_u * (cert.c_lip + 2 * cert.h_sup);

    double slack = 1e-9 * std::max(1.0, cert.h_sup);
    if (!(cert.eps_achieved_l1 <= cert.leakage_bound + slack))
        throw InequalityViolated("build_step_approx: achieved L1 error " +
                                 std::to_string(cert.eps_achieved_l1) +
                                 " exceeds the leakage bound " +
                                 std::to_string(cert.leakage_bound));
    double sup_bound = cert.h_sup + delta * (cert.c_lip + cert.h_sup);
    if (!(cert.eps_achieved_sup <= sup_bound + slack))
        throw InequalityViolated("build_step_approx: achieved sup error exceeds "
                                 "||H|| + delta (C + ||H||)");
    return cert;
}

long long thm1_budget(double L, long long n_table, double supp_vol, int n) {
    if (L <= 0) throw SpecMismatch("thm1_budget: L must be positive");
    if (n_table < 1) throw SpecMismatch("thm1_budget: N table entry must be >= 1");
    long long ceil2 = static_cast<long long>(std::ceil(2.0 / L));
    long long ceil1 = static_cast<long long>(std::ceil(1.0 / L));
    double colors = std::pow(100.0, 2 * n);
    double second = ceil1 * colors * static_cast<double>(n_table) * 3.0 /
                    std::pow(L, 2 * n) * supp_vol;
    return ceil2 * n_table + std::llround(second);
}

TildeKBound tilde_k_bound(const std::vector<double>& c, double f0_sup,
                          double uncovered_vol, double h_sup, double slack) {
    double sum = 0;
    for (double ci : c) sum += ci;
    TildeKBound r;
    r.value = std::fabs(sum) * f0_sup;
    r.bound = f0_sup * h_sup * uncovered_vol;
    if (!(r.value <= r.bound + slack))
        throw InequalityViolated("tilde_k_bound: |sum c_i| " +
                                 std::to_string(r.value) +
                                 " exceeds the uncovered-volume bound " +
                                 std::to_string(r.bound));
    return r;
}

} // namespace hamflex
