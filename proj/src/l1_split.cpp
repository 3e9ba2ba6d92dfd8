#include "hamflex/l1_split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace hamflex {

double ThresholdSequence::sum_a() const {
    return std::accumulate(a.begin(), a.end(), 0.0);
}

Condition5Report check_condition5(const GridField& f) {
    Condition5Report rep;
    double tol = f.effective_support_tol();
    std::vector<double> vals;
    for (double v : f.values)
        if (std::fabs(v) > tol) vals.push_back(v);
    std::sort(vals.begin(), vals.end());
    for (size_t i = 0; i + 1 < vals.size(); ++i)
        if (vals[i] == vals[i + 1]) {
            if (rep.offending_levels.empty() ||
                rep.offending_levels.back() != vals[i])
                rep.offending_levels.push_back(vals[i]);
            rep.ok = false;
        }
    return rep;
}

std::pair<GridField, GridField> perturb_to_condition5(const GridField& f,
                                                      double eta) {
    if (!(eta > 0)) throw EtaTooSmall("eta must be positive");
    double tol = f.effective_support_tol();

    std::map<double, std::vector<int>> by_value;
    for (int i = 0; i < f.spec.num_cells(); ++i)
        if (std::fabs(f.values[i]) > tol) by_value[f.values[i]].push_back(i);

    int num_perturbed = 0;
    for (auto& [v, cells] : by_value)
        num_perturbed += static_cast<int>(cells.size()) - 1;

    GridField fprime = f;
    GridField g(f.spec);
    g.support_tol = 0;
    if (num_perturbed == 0) return {fprime, g};

    // Minimal gap between adjacent distinct levels (0 included, so we never
    // cross zero or the support threshold scale).
    double min_gap = std::numeric_limits<double>::infinity();
    std::vector<double> levels{0.0};
    for (auto& [v, cells] : by_value) levels.push_back(v);
    std::sort(levels.begin(), levels.end());
    for (size_t i = 0; i + 1 < levels.size(); ++i)
        min_gap = std::min(min_gap, levels[i + 1] - levels[i]);

    double eps = std::min(eta / (num_perturbed + 1),
                          min_gap / (2.0 * (num_perturbed + 1)));
    int j = 1;
    for (auto& [v, cells] : by_value) {
        for (size_t k = 1; k < cells.size(); ++k) {
            double delta = j * eps;
            double nv = v + delta;
            if (nv == v)
                throw EtaTooSmall("grid resolution cannot separate plateaus "
                                  "under the requested eta");
            fprime.values[cells[k]] = nv;
            g.values[cells[k]] = -delta;  // f = f' + g
            ++j;
        }
    }

    double g_sup = sup_norm(g);
    double g_weight = g_sup * (support_volume(g) + 1.0);
    if (!(g_weight < 1.0))
        throw EtaTooSmall("perturbation weight not below 1");
    return {fprime, g};
}

ThresholdSequence build_thresholds(const GridField& f) {
    if (sup_norm(f) > 1.0 + 1e-12)
        throw SpecMismatch("build_thresholds requires ||f||_inf <= 1");
    const double ca = f.spec.cell_area();
    double tol = f.effective_support_tol();

    // Support absolute values, descending, with their cells.
    std::vector<std::pair<double, int>> vals;
    for (int i = 0; i < f.spec.num_cells(); ++i)
        if (std::fabs(f.values[i]) > tol) vals.push_back({std::fabs(f.values[i]), i});
    std::sort(vals.begin(), vals.end(), std::greater<>());

    ThresholdSequence seq;
    seq.a.push_back(1.0);
    size_t pos = 0;  // first value not yet assigned to a slab
    const int k_cap = static_cast<int>(std::floor(1.0 / ca + 1e-12));

    while (pos < vals.size()) {
        double ai = seq.a.back();
        // Band (a_i/2, a_i].
        size_t band_end = pos;
        while (band_end < vals.size() && vals[band_end].first > ai / 2) ++band_end;
        int band_count = static_cast<int>(band_end - pos);
        double band_vol = band_count * ca;

        double a_next;
        bool halved;
        size_t take_end;
        if (band_vol < 1.0) {
            a_next = ai / 2;
            halved = true;
            take_end = band_end;
        } else {
            halved = false;
            int k = std::min(band_count, k_cap);
            // Ties between |values| (a +v/-v pair) cannot be cut through;
            // back off to the previous distinct level.
            while (k > 0 && k < band_count &&
                   vals[pos + k - 1].first == vals[pos + k].first)
                --k;
            if (k == 0) {
                a_next = (ai + vals[pos].first) / 2;
                take_end = pos;
            } else if (k == band_count) {
                a_next = ai / 2;
                take_end = band_end;
            } else {
                a_next = (vals[pos + k - 1].first + vals[pos + k].first) / 2;
                take_end = pos + k;
            }
        }

        CellSet slab(f.spec);
        for (size_t t = pos; t < take_end; ++t) slab.insert(vals[t].second);
        seq.a.push_back(a_next);
        seq.halving_flags.push_back(halved);
        seq.slabs.push_back(std::move(slab));
        seq.slab_volumes.push_back((take_end - pos) * ca);
        pos = take_end;
    }
    return seq;
}

GridField build_h_bump(const GridSpec& spec, const CellSet& h_region) {
    const double ca = spec.cell_area();
    int k = static_cast<int>(std::ceil(2.0 / ca));
    auto cells = h_region.cells();
    if (static_cast<int>(cells.size()) < k)
        throw VolumeTooSmall("h_region volume below 2");
    cells.resize(k);

    // Tent profile over the chosen cells, ordered by distance to their
    // centroid; scaled so the integral is exactly 1 and sup <= 1.
    double cx = 0, cy = 0;
    for (int c : cells) { cx += spec.cell_x(c); cy += spec.cell_y(c); }
    cx /= k; cy /= k;
    std::vector<std::pair<double, int>> by_dist;
    for (int c : cells) {
        double dx = spec.cell_x(c) - cx, dy = spec.cell_y(c) - cy;
        by_dist.push_back({dx * dx + dy * dy, c});
    }
    std::sort(by_dist.begin(), by_dist.end());

    GridField h(spec);
    h.support_tol = 0;
    double profile_sum = 0;
    for (int r = 0; r < k; ++r) {
        double p = double(k - r) / k;
        h.values[by_dist[r].second] = p;
        profile_sum += p;
    }
    double scale = 1.0 / (ca * profile_sum);
    for (int c : cells) h.values[c] *= scale;
    if (sup_norm(h) > 1.0 + 1e-12)
        throw VolumeTooSmall("h bump exceeds unit sup norm");
    return h;
}

namespace {

PieceStats stats_of(const GridField& p) {
    return PieceStats{sup_norm(p), support_volume(p), mean(p)};
}

GridField slab_piece(const GridField& f, const CellSet& slab,
                     const GridField& h) {
    GridField part = restrict_to(f, slab);
    double integral = mean(part);
    return lin_comb({{1.0, &part}, {-integral, &h}});
}

} // namespace

SplitCertificate split(const GridField& f, const CellSet& h_region) {
    const double ca = f.spec.cell_area();
    if (sup_norm(f) + l1_norm(f) > 1.0 + 1e-9)
        throw SpecMismatch("split requires ||f||_inf + ||f||_L1 <= 1");
    if (std::fabs(mean(f)) > 1e-10)
        throw SpecMismatch("split requires mean(f) = 0");
    if (!h_region.disjoint_from(support_cells(f)))
        throw RegionOverlap("h_region meets supp f");
    if (h_region.volume() < 2.0)
        throw VolumeTooSmall("h_region volume below 2");

    SplitCertificate cert;
    if (support_cells(f).empty()) return cert;

    // Condition (5) surrogate; perturb when plateaus are present.
    auto c5 = check_condition5(f);
    GridField base = f;
    GridField g(f.spec);
    cert.condition5_ok = c5.ok;
    if (!c5.ok) {
        auto [fp, gp] = perturb_to_condition5(f, 1e-8);
        base = std::move(fp);
        g = std::move(gp);
    }

    GridField h = build_h_bump(f.spec, h_region);
    cert.thresholds = build_thresholds(base);
    const auto& seq = cert.thresholds;
    const double vol_h = support_volume(h);

    // Interim budget over the per-slab pieces, before tail grouping.
    cert.interim_budget = 0;
    std::vector<double> slab_integrals(seq.num_slabs());
    for (int i = 0; i < seq.num_slabs(); ++i) {
        if (seq.slab_volumes[i] == 0) continue;
        GridField part = restrict_to(base, seq.slabs[i]);
        slab_integrals[i] = mean(part);
        double sup_i = std::max(sup_norm(part),
                                std::fabs(slab_integrals[i]) * sup_norm(h));
        cert.interim_budget +=
            sup_i * (seq.slab_volumes[i] + vol_h + 1.0);
    }

    // Tail grouping: smallest m with sum_{i>=m} Vol(S_i) < 1.
    std::vector<double> suffix(seq.num_slabs() + 1, 0.0);
    for (int i = seq.num_slabs() - 1; i >= 0; --i)
        suffix[i] = suffix[i + 1] + seq.slab_volumes[i];
    int m = 0;
    while (m < seq.num_slabs() && suffix[m] >= 1.0) ++m;
    cert.tail_index = m;
    cert.tail_volume = suffix[m];

    for (int i = 0; i < m; ++i) {
        if (seq.slab_volumes[i] == 0) continue;
        cert.pieces.push_back(slab_piece(base, seq.slabs[i], h));
    }
    if (m < seq.num_slabs()) {
        CellSet tail(f.spec);
        for (int i = m; i < seq.num_slabs(); ++i) tail = tail.unite(seq.slabs[i]);
        if (!tail.empty()) cert.pieces.push_back(slab_piece(base, tail, h));
    }
    if (!c5.ok && sup_norm(g) > 0) {
        // Zero-mean form of the perturbation remainder.
        double gi = mean(g);
        cert.pieces.push_back(lin_comb({{1.0, &g}, {-gi, &h}}));
    }

    for (auto& p : cert.pieces) {
        p.support_tol = 0;  // slab and h cells carry exact values, rest is 0
        cert.per_piece.push_back(stats_of(p));
        cert.budget +=
            cert.per_piece.back().sup * (cert.per_piece.back().support_vol + 1.0);
    }
    (void)ca;
    if (cert.budget > 100.0)
        throw BudgetExceeded("split budget exceeds 100");
    return cert;
}

} // namespace hamflex
