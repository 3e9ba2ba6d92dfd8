#include "hamflex/cube_grid.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

namespace hamflex {

CellSet Cube::cells(const GridSpec& s) const {
    CellSet out(s);
    for (int i = 0; i < s.num_cells(); ++i)
        if (contains(s.cell_x(i), s.cell_y(i))) out.insert(i);
    return out;
}

double CubeFamily::total_volume() const {
    double v = 0;
    for (auto& q : cubes) v += q.volume();
    return v;
}

CubeCover build_cube_cover(const std::vector<CellSet>& support_by_ball,
                           const BallCover& cover, double a, double delta,
                           int n) {
    if (!(a > 0) || a >= delta / (2 * n))
        throw ScaleTooLarge("need 0 < a < delta / (2n)");
    if (static_cast<int>(support_by_ball.size()) != cover.num_balls())
        throw SpecMismatch("support_by_ball size must match ball count");
    if (cover.colors.empty() && cover.num_balls() > 0)
        throw SpecMismatch("cover must be colored before cube construction");

    CubeCover families;
    const double half = 2.0 * a / 3.0;

    for (int b = 0; b < cover.num_balls(); ++b) {
        const CellSet& supp = support_by_ball[b];
        if (supp.empty()) continue;
        const GridSpec& s = supp.spec;
        int rings = static_cast<int>(std::ceil(delta / std::min(s.dx(), s.dy())));
        CellSet vdelta = supp.dilate(rings);

        // Bounding box of the dilated support, in lattice units.
        double bx0 = s.x_max, bx1 = s.x_min, by0 = s.y_max, by1 = s.y_min;
        for (int i : vdelta.cells()) {
            bx0 = std::min(bx0, s.cell_x(i));
            bx1 = std::max(bx1, s.cell_x(i));
            by0 = std::min(by0, s.cell_y(i));
            by1 = std::max(by1, s.cell_y(i));
        }

        auto supp_cells = supp.cells();
        for (int shift = 0; shift < 4; ++shift) {
            int lx = shift & 1, ly = shift >> 1;
            FamilyKey key{cover.colors[b], shift};
            auto& fam = families[key];
            fam.key = key;
            fam.a = a;

            long i0 = std::lround(std::floor((bx0 - a * lx) / (2 * a))) - 1;
            long i1 = std::lround(std::ceil((bx1 - a * lx) / (2 * a))) + 1;
            long j0 = std::lround(std::floor((by0 - a * ly) / (2 * a))) - 1;
            long j1 = std::lround(std::ceil((by1 - a * ly) / (2 * a))) + 1;
            for (long j = j0; j <= j1; ++j)
                for (long i = i0; i <= i1; ++i) {
                    Cube q;
                    q.cx = a * lx + 2 * a * i;
                    q.cy = a * ly + 2 * a * j;
                    q.half_side = half;
                    q.host_ball = b;
                    // Lattice point must lie in the delta-neighborhood.
                    int cell = s.locate(q.cx, q.cy);
                    if (cell < 0 || !vdelta.mask[cell]) continue;
                    bool meets_support = false;
                    for (int c : supp_cells)
                        if (q.contains(s.cell_x(c), s.cell_y(c))) {
                            meets_support = true;
                            break;
                        }
                    if (meets_support) fam.cubes.push_back(q);
                }
        }
    }

    // Drop empty families created by map access.
    for (auto it = families.begin(); it != families.end();)
        it = it->second.cubes.empty() ? families.erase(it) : std::next(it);
    return families;
}

std::vector<VolumeRatio> verify_volume_bound(const CubeCover& families,
                                             double supp_vol) {
    std::vector<VolumeRatio> out;
    for (auto& [key, fam] : families) {
        VolumeRatio r;
        r.key = key;
        r.ratio = supp_vol > 0 ? fam.total_volume() / supp_vol
                               : std::numeric_limits<double>::infinity();
        r.exceeds_2 = r.ratio > 2.0;
        out.push_back(r);
    }
    return out;
}

std::vector<Cube> all_cubes(const CubeCover& families) {
    std::vector<Cube> out;
    for (auto& [key, fam] : families)
        out.insert(out.end(), fam.cubes.begin(), fam.cubes.end());
    return out;
}

} // namespace hamflex
