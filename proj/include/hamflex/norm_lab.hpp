#ifndef HAMFLEX_NORM_LAB_HPP
#define HAMFLEX_NORM_LAB_HPP

#include <map>
#include <string>
#include <vector>

#include "hamflex/field.hpp"

namespace hamflex {

/// Parametric invariant norm alpha ||.||_inf + sum_p beta_p ||.||_{L^p}.
struct NormSpec {
    double alpha = 0;
    std::map<double, double> betas;  // p -> weight, p in [1, inf)

    void validate() const;
};

double eval_norm(const NormSpec& spec, const GridField& f);

/// Time-space quadrature of H (trapezoid in t, cell sums in space).
double calabi(const TimeField& H);

/// Unit-integral field with 0 <= h_k <= 1/k and a height-1/k plateau of
/// volume > k - 1/k, built inside `region`. Region volume must be at least
/// k + 1 (RegionTooSmall otherwise).
GridField build_hk(int k, const CellSet& region);

struct BEstimate {
    std::vector<double> norms;  // ||h_k|| for k = 1..k_max
    double b_empirical = 0;     // min over the tail half of the sequence
    double b_analytic = 0;      // closed form for the parametric family
};

/// liminf ||h_k|| estimate: empirical tail minimum plus the closed form
/// (b = beta_1 for this family). Throws GridExhausted when the grid cannot
/// host h_{k_max}.
BEstimate estimate_b(const NormSpec& spec, const GridSpec& grid, int k_max);

enum class Regime { degenerate_Cal, Hofer, Hofer_plus_Cal };

std::string regime_name(Regime r);

struct RegimeReport {
    Regime regime = Regime::Hofer;
    double lower_const = 0;  // sup-domination constant; alpha for this family
    BEstimate b;
};

/// Case table: alpha = 0 -> degenerate_Cal; else b = 0 -> Hofer; else
/// Hofer_plus_Cal. The classifier uses the analytic b; the empirical
/// sequence is cross-checked within 2/k_max.
RegimeReport classify_regime(const NormSpec& spec, const GridSpec& grid,
                             int k_max);

struct AveragingReport {
    double lhs = 0;  // || sum <F>_S 1_S ||
    double rhs = 0;  // || F ||
};

/// Conditional-expectation contraction: replacing F by its averages over a
/// disjoint partition of its support does not increase the norm. Throws
/// InequalityViolated on a measured counter-instance.
AveragingReport averaging_check(const NormSpec& spec, const GridField& F,
                                const std::vector<CellSet>& partition);

struct AbelDecomposition {
    double band_width = 0;              // ||F||_inf / levels
    GridField staircase;                // signed level-band staircase
    GridField remainder;                // F - staircase, sup <= band_width
    std::vector<double> band_volumes;   // per level band (positive side first)
    std::vector<double> tail_volumes;   // nested tails used by the staircase
};

AbelDecomposition abel_decompose(const GridField& F, int levels);

/// Norms of indicators along a decreasing volume sequence; decays to zero
/// only without a sup-norm component (HypothesisViolated when alpha > 0).
std::vector<double> indicator_decay(const NormSpec& spec,
                                    const std::vector<double>& vols);

} // namespace hamflex

#endif
