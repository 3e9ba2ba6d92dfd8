#ifndef HAMFLEX_CUBE_GRID_HPP
#define HAMFLEX_CUBE_GRID_HPP

#include <cmath>
#include <map>
#include <vector>

#include "hamflex/cover.hpp"
#include "hamflex/field.hpp"

namespace hamflex {

/// Axis-aligned open cube (square in the planar model).
struct Cube {
    double cx = 0, cy = 0;   // center
    double half_side = 0;    // 2a/3 for lattice cubes
    int host_ball = -1;      // index into the BallCover

    double volume() const { return (2 * half_side) * (2 * half_side); }
    bool contains(double x, double y) const {
        return std::fabs(x - cx) < half_side && std::fabs(y - cy) < half_side;
    }
    bool intersects(const Cube& o) const {
        return std::fabs(cx - o.cx) < half_side + o.half_side &&
               std::fabs(cy - o.cy) < half_side + o.half_side;
    }
    CellSet cells(const GridSpec& s) const;
};

/// Shift class key: (color, lattice shift lambda in {0,1}^2 packed as
/// lambda_x + 2*lambda_y).
struct FamilyKey {
    int color = 0;
    int shift = 0;
    bool operator<(const FamilyKey& o) const {
        return color != o.color ? color < o.color : shift < o.shift;
    }
};

struct CubeFamily {
    FamilyKey key;
    std::vector<Cube> cubes;
    double a = 0;  // lattice scale

    double total_volume() const;
};

using CubeCover = std::map<FamilyKey, CubeFamily>;

/// Shifted-lattice cube cover. support_by_ball[b] is the part of the support
/// hosted by ball b (cells). Lattice a*lambda + 2a Z^2 intersected with the
/// delta-dilation of the support; a cube is kept iff its interior contains a
/// support cell center. Requires 0 < a < delta / (2n).
CubeCover build_cube_cover(const std::vector<CellSet>& support_by_ball,
                           const BallCover& cover, double a, double delta,
                           int n);

struct VolumeRatio {
    FamilyKey key;
    double ratio = 0;  // Vol(family) / Vol(supp)
    bool exceeds_2 = false;
};

/// Per-class volume check against 2 * Vol(supp f). Reports, never throws:
/// the bound needs delta small relative to the support geometry.
std::vector<VolumeRatio> verify_volume_bound(const CubeCover& families,
                                             double supp_vol);

/// All cubes of a cover in one list.
std::vector<Cube> all_cubes(const CubeCover& families);

} // namespace hamflex

#endif
