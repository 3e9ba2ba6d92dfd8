#ifndef HAMFLEX_L1_SPLIT_HPP
#define HAMFLEX_L1_SPLIT_HPP

#include <vector>

#include "hamflex/field.hpp"

namespace hamflex {

/// Decreasing threshold chain a_0 = 1 > a_1 > ... with the halving/unit-slab
/// branch rule. slab i (1-based in the maths) is {a_i < |f| <= a_{i-1}}.
struct ThresholdSequence {
    std::vector<double> a;             // a[0] = 1
    std::vector<double> slab_volumes;  // slab_volumes[i] = Vol(S_{i+1})
    std::vector<bool> halving_flags;   // true where a_{i+1} = a_i / 2
    std::vector<CellSet> slabs;

    double sum_a() const;
    int num_slabs() const { return static_cast<int>(slabs.size()); }
};

struct PieceStats {
    double sup = 0;
    double support_vol = 0;
    double mean = 0;
};

struct SplitCertificate {
    std::vector<GridField> pieces;
    std::vector<PieceStats> per_piece;
    double budget = 0;          // sum sup * (vol + 1)
    double interim_budget = 0;  // before tail grouping, over raw slab pieces
    int tail_index = 0;         // first slab index merged into the tail piece
    double tail_volume = 0;     // Vol(S_infty)
    bool condition5_ok = true;  // input passed check_condition5 unperturbed
    ThresholdSequence thresholds;
};

struct Condition5Report {
    bool ok = true;
    std::vector<double> offending_levels;  // nonzero values hit by >1 cell
};

/// Grid surrogate of the no-flat-level-set condition: no nonzero value is
/// attained on more than one cell.
Condition5Report check_condition5(const GridField& f);

/// Writes f = f' + g with f' generic (condition-5), ||g||_inf <= eta and
/// ||g||_inf * (Vol(supp g) + 1) < 1. g is supported exactly on the plateau
/// cells that needed displacement.
std::pair<GridField, GridField> perturb_to_condition5(const GridField& f,
                                                      double eta);

/// Threshold chain construction. Requires ||f||_inf <= 1 and a condition-5
/// input.
ThresholdSequence build_thresholds(const GridField& f);

/// Full splitting of a zero-mean f with ||f||_inf + ||f||_L1 <= 1 into
/// zero-mean certified pieces. h_region must be disjoint from supp f and
/// have volume >= 2.
SplitCertificate split(const GridField& f, const CellSet& h_region);

/// The compensator bump: supported on ceil(2/cell_area) cells of h_region,
/// integral exactly 1, sup <= 1, support volume 2 up to one cell of slack.
GridField build_h_bump(const GridSpec& spec, const CellSet& h_region);

} // namespace hamflex

#endif
