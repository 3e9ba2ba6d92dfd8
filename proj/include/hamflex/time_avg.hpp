#ifndef HAMFLEX_TIME_AVG_HPP
#define HAMFLEX_TIME_AVG_HPP

#include <vector>

#include "hamflex/field.hpp"
#include "hamflex/flow.hpp"

namespace hamflex {

/// Reparametrizing bump for the i-th time interval I_i = [(i-1)/N, i/N],
/// sampled uniformly on I_i (endpoints included).
struct TimeProfile {
    int N = 1;
    int interval = 1;  // 1-based
    std::vector<double> values;

    double t0() const { return static_cast<double>(interval - 1) / N; }
    double t1() const { return static_cast<double>(interval) / N; }
    /// Trapezoid integral over I_i.
    double integral() const;
    /// Trapezoid integral of |1 - chi/N| over I_i.
    double deviation_integral() const;
};

/// Trapezoid profile on I_i with unit integral and deviation integral
/// targeted at 1/(2N^2), half the required bound. Throws
/// CannotMeetTolerance when the sampled profile misses the 1/N^2 bound.
TimeProfile bump_profile(int N, int i, int samples);

struct NormalizeWitness {
    std::vector<double> a;  // per-sample spatial integral of H
    GridField chi;          // the flat absorber bump, unit integral
};

/// Subtract the time-dependent spatial mean: G = H - a(t) chi with chi a
/// unit-integral bump on chi_region, disjoint from every support slice and
/// with ||chi||_inf below 1/Vol(union support). Preserves the sup norm of
/// every slice.
std::pair<TimeField, NormalizeWitness> normalize_mean(const TimeField& H,
                                                      const CellSet& chi_region);

struct DiscretizationCertificate {
    int N = 0;
    std::vector<GridField> g;       // g_i(x) = int_{I_i} G dt
    std::vector<TimeProfile> chi;
    TimeField g_tilde;              // chi_i(t) g_i(x)
    TimeField K;                    // error generator along the g_tilde flow
    double k_l1inf = 0;             // ||K||_{L(1,inf)}
    double k_bound = 0;             // (C + C') / N
    double sum_g_sup = 0;           // sum of ||g_i||_inf
    double sum_bound = 0;           // ||G||_{L(1,inf)} + C/N
    double c_time = 0;              // C  = sup |dG/dt|
    double c_sup = 0;               // C' = max_t ||G(t,.)||_inf
};

/// Split a zero-mean time-dependent Hamiltonian into N autonomous pieces
/// with reparametrizing bumps, and certify the error generator
/// K(t,x) = G(t, phi^t(x)) - Gtilde(t, phi^t(x)) along the Gtilde flow.
/// The time grid must refine the N intervals with at least 32 sub-steps
/// per interval (TimeGridTooCoarse otherwise).
DiscretizationCertificate discretize(const TimeField& G, int N);

} // namespace hamflex

#endif
