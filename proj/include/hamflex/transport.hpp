#ifndef HAMFLEX_TRANSPORT_HPP
#define HAMFLEX_TRANSPORT_HPP

#include <vector>

#include "hamflex/cover.hpp"
#include "hamflex/cube_grid.hpp"

namespace hamflex {

struct Waypoint {
    double x = 0, y = 0;
};

/// A planned move for one cube: polyline through its tree-path ball centers
/// into U, then a straight translation into its slot inside Q_L.
struct CubeRoute {
    Cube cube;
    Cube target;  // slot inside Q_L, same size
    std::vector<Waypoint> waypoints;
};

struct TransportPlan {
    std::vector<std::vector<int>> families;  // indices into `order`
    std::vector<Cube> order;                 // the total order on cubes
    std::vector<CubeRoute> routes;           // one per cube, in order
    int n_l = 0;                             // ceil(3 Vol(supp f)/(2L)^{2n})
    double family_capacity = 0;              // (1/2)(2L)^{2n}
};

/// Key used by the total order: (leaf number of the host ball, tree depth,
/// within-ball rank).
struct CubeOrderKey {
    int leaf = 0;
    int depth = 0;
    int rank = 0;
    bool operator<(const CubeOrderKey& o) const {
        if (leaf != o.leaf) return leaf < o.leaf;
        if (depth != o.depth) return depth < o.depth;
        return rank < o.rank;
    }
};

/// Total order on cubes from the spanning tree: by leaf number of the host
/// ball, then by distance to the root U (closer first), then by within-ball
/// rank. Requires a spanning tree on the cover.
std::vector<Cube> order_cubes(const CubeCover& families, const BallCover& cover);

/// The same order keys, exposed for the lexicographic oracle.
std::vector<CubeOrderKey> order_keys(const CubeCover& families,
                                     const BallCover& cover);

/// Contiguous first-fit partition of the ordered cubes into volume bins of
/// capacity (1/2)(2L)^{2n}.
std::vector<std::vector<int>> partition_families(const std::vector<Cube>& ordered,
                                                 double L, double supp_vol,
                                                 int n);

/// Routes for one family: per cube a waypoint path through its tree-path
/// ball centers into U and a shelf-packed slot inside q_target. The swept
/// corridor of cube i must avoid cubes i+1.. and the obstacles.
std::vector<CubeRoute> plan_routes(const std::vector<Cube>& family,
                                   const BallCover& cover,
                                   const Cube& q_target,
                                   const std::vector<CellSet>& obstacles);

/// Full plan: order, partition, and routes for every family.
TransportPlan plan_transport(const CubeCover& families, const BallCover& cover,
                             const Cube& q_target, double L, double supp_vol,
                             int n, const std::vector<CellSet>& obstacles);

/// Cells swept by translating `cube` along the waypoint polyline, dilated by
/// `clearance_cells` rings.
CellSet swept_region(const CubeRoute& route, const GridSpec& spec,
                     int clearance_cells);

} // namespace hamflex

#endif
