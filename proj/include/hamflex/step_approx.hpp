#ifndef HAMFLEX_STEP_APPROX_HPP
#define HAMFLEX_STEP_APPROX_HPP

#include <vector>

#include "hamflex/cube_grid.hpp"
#include "hamflex/field.hpp"

namespace hamflex {

struct StepApproxCertificate {
    std::vector<Cube> cubes;
    std::vector<double> c;        // cube averages of H
    std::vector<GridField> F;     // F[i]: normalized plateau on cubes[i]
    GridField K;                  // sum_i c_i F_i
    double delta = 0;             // cube diameter bound used
    double eps_achieved_sup = 0;  // sup |H - K|
    double eps_achieved_l1 = 0;   // int |H - K|
    double leakage_bound = 0;     // Vol(V) C' + delta Vol(U) (C + 2C')
    double uncovered_vol = 0;     // Vol(supp H minus the cubes)
    double c_lip = 0;             // grid Lipschitz estimate of H
    double h_sup = 0;

    const GridField& F0() const { return F.front(); }
};

struct LinearWindow {
    Cube window;
    double c = 0;
    double residual = 0;  // sup over the window of |u - (x1 + c)|
};

/// Scan axis-aligned square windows for the region where u is closest to
/// x1 + c. Throws NoWindow when every candidate residual exceeds half the
/// value range of u (in particular for constant u).
LinearWindow find_linear_window(const GridField& u, double l_min);

/// Approximate a compactly supported H by a step-like sum of cube plateau
/// profiles with the cube averages as coefficients. Cubes must be pairwise
/// disjoint with diameter at most delta.
StepApproxCertificate build_step_approx(const GridField& H,
                                        const std::vector<Cube>& cubes,
                                        double delta);

/// ceil(2/L) N + ceil(1/L) 100^{2n} N (3/L^{2n}) Vol.
long long thm1_budget(double L, long long n_table, double supp_vol, int n);

struct TildeKBound {
    double value = 0;  // |sum c_i| * F0_sup
    double bound = 0;  // F0_sup * H_sup * uncovered_vol
};

/// Net-coefficient bound for the residual autonomous generator; asserts
/// value <= bound + slack.
TildeKBound tilde_k_bound(const std::vector<double>& c, double f0_sup,
                          double uncovered_vol, double h_sup,
                          double slack = 1e-9);

} // namespace hamflex

#endif
