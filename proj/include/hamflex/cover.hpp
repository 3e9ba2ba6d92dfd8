#ifndef HAMFLEX_COVER_HPP
#define HAMFLEX_COVER_HPP

#include <vector>

#include "hamflex/field.hpp"

namespace hamflex {

/// Ball cover of a region: maximal eps-separated net over omega \ U,
/// intersection graph (with a distinguished U vertex), distance-2 coloring
/// and a shortest-path spanning tree rooted at U.
struct BallCover {
    struct Point {
        double x = 0, y = 0;
    };

    std::vector<Point> centers;
    double radius = 0;
    int n = 1;  // dimension parameter for the constants 5^{2n}-1, 100^n

    /// Adjacency over ball indices 0..centers.size()-1 plus the U vertex at
    /// index u_vertex() (= centers.size()).
    std::vector<std::vector<int>> adjacency;
    std::vector<int> colors;       // per ball; empty until colored
    std::vector<int> tree_parent;  // per vertex; u_vertex() is the root (-1)
    std::vector<int> tree_depth;   // graph distance to U

    CellSet omega_region, u_region;

    int u_vertex() const { return static_cast<int>(centers.size()); }
    int num_balls() const { return static_cast<int>(centers.size()); }
    int max_degree() const;
    int num_colors() const;
    int degree_bound() const;  // 5^{2n} - 1
    int color_bound() const;   // 100^n

    /// Tree path from ball b up to the U vertex (inclusive).
    std::vector<int> path_to_root(int b) const;
};

/// Greedy maximal eps-separated net over cell centers of omega \ U, plus the
/// intersection graph. Requires eps > 2 cell diagonals.
BallCover build_net(const CellSet& omega_region, const CellSet& u_region,
                    double eps, int n);

/// Greedy distance-2 coloring of the ball-ball graph (U vertex excluded).
/// Same-color balls end at graph distance >= 3.
void color_distance2(BallCover& cover);

/// BFS shortest-path spanning tree rooted at the U vertex. Throws
/// Disconnected if some ball cannot reach U.
void spanning_tree(BallCover& cover);

/// Graph distances from every vertex (BFS); used by validity checks.
std::vector<int> bfs_distances(const BallCover& cover, int source);

} // namespace hamflex

#endif
