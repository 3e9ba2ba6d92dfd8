#include "hamflex/norm_lab.hpp"

#include <algorithm>
#include <cmath>

namespace hamflex {

void NormSpec::validate() const {
    if (alpha < 0) throw SpecMismatch("norm spec: alpha must be nonnegative");
    double total = alpha;
    for (auto& [p, w] : betas) {
        if (p < 1) throw SpecMismatch("norm spec: p must be at least 1");
        if (w < 0) throw SpecMismatch("norm spec: weights must be nonnegative");
        total += w;
    }
    if (total == 0) throw SpecMismatch("norm spec: all weights are zero");
}

double eval_norm(const NormSpec& spec, const GridField& f) {
    spec.validate();
    double v = spec.alpha * sup_norm(f);
    for (auto& [p, w] : spec.betas)
        if (w > 0) v += w * lp_norm(f, p);
    return v;
}

double calabi(const TimeField& H) {
    H.validate();
    double total = 0;
    for (int k = 0; k + 1 < H.num_samples(); ++k) {
        double a = mean(H.fields[k]);
        double b = mean(H.fields[k + 1]);
        total += 0.5 * (a + b) * H.dt();
    }
    return total;
}

GridField build_hk(int k, const CellSet& region) {
    if (k < 1) throw SpecMismatch("build_hk: k must be positive");
    const GridSpec& s = region.spec;
    double ca = s.cell_area();
    std::vector<int> cells = region.cells();
    double vol = cells.size() * ca;
    if (vol < k + 1)
        throw RegionTooSmall("build_hk: region volume " + std::to_string(vol) +
                             " below k + 1 = " + std::to_string(k + 1));

    // Plateau at height 1/k of volume just above k - 1/k, collar below 1/k
    // absorbing the rest of the unit integral.
    double need = k - 1.0 / k;
    int n_plateau = static_cast<int>(std::floor(need / ca)) + 1;
    double plateau_mass = n_plateau * ca / k;
    double rest = 1.0 - plateau_mass;
    if (rest < -1e-12)
        throw RegionTooSmall("build_hk: plateau overshoots the unit integral; "
                             "grid cells too coarse for this k");
    rest = std::max(rest, 0.0);
    int n_collar = rest > 0 ? static_cast<int>(std::floor(rest * k / ca)) + 1 : 0;
    if (n_plateau + n_collar > static_cast<int>(cells.size()))
        throw RegionTooSmall("build_hk: region has too few cells for the "
                             "plateau and collar");
    GridField h(s);
    h.support_tol = 0;
    for (int i = 0; i < n_plateau; ++i) h[cells[i]] = 1.0 / k;
    if (n_collar > 0) {
        double v = rest / (n_collar * ca);
        for (int i = 0; i < n_collar; ++i) h[cells[n_plateau + i]] = v;
    }
    return h;
}

BEstimate estimate_b(const NormSpec& spec, const GridSpec& grid, int k_max) {
    spec.validate();
    if (k_max < 2) throw SpecMismatch("estimate_b: k_max must be at least 2");
    double total_vol =
        (grid.x_max - grid.x_min) * (grid.y_max - grid.y_min);
    if (total_vol < k_max + 1)
        throw GridExhausted("estimate_b: grid volume " + std::to_string(total_vol) +
                            " cannot host h_k for k = " + std::to_string(k_max));

    CellSet all(grid);
    for (int idx = 0; idx < grid.num_cells(); ++idx) all.insert(idx);

    BEstimate est;
    for (int k = 1; k <= k_max; ++k)
        est.norms.push_back(eval_norm(spec, build_hk(k, all)));
    double tail_min = est.norms.back();
    for (int k = k_max / 2; k <= k_max; ++k)
        tail_min = std::min(tail_min, est.norms[k - 1]);
    est.b_empirical = tail_min;
    auto it = spec.betas.find(1.0);
    est.b_analytic = it != spec.betas.end() ? it->second : 0.0;
    return est;
}

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::degenerate_Cal: return "degenerate_Cal";
        case Regime::Hofer: return "Hofer";
        case Regime::Hofer_plus_Cal: return "Hofer_plus_Cal";
    }
    return "?";
}

RegimeReport classify_regime(const NormSpec& spec, const GridSpec& grid,
                             int k_max) {
    spec.validate();
    RegimeReport rep;
    rep.b = estimate_b(spec, grid, k_max);
    rep.lower_const = spec.alpha;
    if (std::fabs(rep.b.b_empirical - rep.b.b_analytic) > 2.0 / k_max)
        throw InequalityViolated("classify_regime: empirical liminf " +
                                 std::to_string(rep.b.b_empirical) +
                                 " disagrees with the closed form " +
                                 std::to_string(rep.b.b_analytic));
    if (spec.alpha == 0) {
        rep.regime = Regime::degenerate_Cal;
    } else if (rep.b.b_analytic == 0) {
        rep.regime = Regime::Hofer;
    } else {
        rep.regime = Regime::Hofer_plus_Cal;
    }
    return rep;
}

AveragingReport averaging_check(const NormSpec& spec, const GridField& F,
                                const std::vector<CellSet>& partition) {
    const GridSpec& s = F.spec;
    CellSet supp = support_cells(F);
    CellSet seen(s);
    for (const CellSet& part : partition) {
        if (part.spec != s) throw SpecMismatch("averaging_check: grid mismatch");
        if (!seen.disjoint_from(part))
            throw RegionOverlap("averaging_check: partition sets overlap");
        seen = seen.unite(part);
    }
    for (int idx : supp.cells())
        if (!seen.contains(idx))
            throw SpecMismatch("averaging_check: partition misses part of supp F");

    GridField G(s);
    for (const CellSet& part : partition) {
        std::vector<int> cells = part.cells();
        if (cells.empty()) continue;
        double sum = 0;
        for (int idx : cells) sum += F[idx];
        double avg = sum / cells.size();
        for (int idx : cells) G[idx] = avg;
    }
    AveragingReport rep;
    rep.lhs = eval_norm(spec, G);
    rep.rhs = eval_norm(spec, F);
    if (!(rep.lhs <= rep.rhs + 1e-9 * std::max(1.0, rep.rhs)))
        throw InequalityViolated("averaging_check: averaged norm " +
                                 std::to_string(rep.lhs) + " exceeds ||F|| = " +
                                 std::to_string(rep.rhs));
    return rep;
}

AbelDecomposition abel_decompose(const GridField& F, int levels) {
    if (levels < 1) throw SpecMismatch("abel_decompose: levels must be positive");
    const GridSpec& s = F.spec;
    AbelDecomposition dec;
    double sup = sup_norm(F);
    dec.band_width = sup / levels;
    dec.staircase = GridField(s);
    dec.remainder = GridField(s);
    dec.band_volumes.assign(2 * levels, 0.0);
    dec.tail_volumes.assign(2 * levels, 0.0);
    if (sup == 0) return dec;

    double w = dec.band_width;
    for (int idx = 0; idx < s.num_cells(); ++idx) {
        double v = F[idx];
        int lvl = static_cast<int>(std::floor(std::fabs(v) / w));
        lvl = std::min(lvl, levels);
        double st = (v < 0 ? -1.0 : 1.0) * lvl * w;
        dec.staircase[idx] = st;
        dec.remainder[idx] = v - st;
        if (lvl > 0) {
            int slot = (v < 0 ? levels : 0) + (lvl - 1);
            dec.band_volumes[slot] += s.cell_area();
            // every tail 1..lvl contains this cell
            for (int t = 1; t <= lvl; ++t)
                dec.tail_volumes[(v < 0 ? levels : 0) + (t - 1)] +=
                    s.cell_area();
        }
    }
    return dec;
}

std::vector<double> indicator_decay(const NormSpec& spec,
                                    const std::vector<double>& vols) {
    spec.validate();
    if (spec.alpha > 0)
        throw HypothesisViolated("indicator_decay: a sup-norm component keeps "
                                 "||1_U|| bounded away from zero");
    std::vector<double> out;
    for (std::size_t i = 0; i < vols.size(); ++i) {
        double v = vols[i];
        if (v <= 0) throw SpecMismatch("indicator_decay: volumes must be positive");
        if (i > 0 && v >= vols[i - 1])
            throw SpecMismatch("indicator_decay: volumes must decrease");
        double norm = 0;
        for (auto& [p, wgt] : spec.betas) norm += wgt * std::pow(v, 1.0 / p);
        out.push_back(norm);
    }
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] > out[i - 1] + 1e-12)
            throw InequalityViolated("indicator_decay: norm sequence fails to decay");
    return out;
}

} // namespace hamflex
