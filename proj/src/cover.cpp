#include "hamflex/cover.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace hamflex {

int BallCover::max_degree() const {
    int d = 0;
    for (int b = 0; b < num_balls(); ++b) {
        int deg = 0;
        for (int nb : adjacency[b])
            if (nb != u_vertex()) ++deg;
        d = std::max(d, deg);
    }
    return d;
}

int BallCover::num_colors() const {
    int c = 0;
    for (int col : colors) c = std::max(c, col + 1);
    return c;
}

int BallCover::degree_bound() const {
    int p = 1;
    for (int i = 0; i < 2 * n; ++i) p *= 5;
    return p - 1;
}

int BallCover::color_bound() const {
    int p = 1;
    for (int i = 0; i < n; ++i) p *= 100;
    return p;
}

std::vector<int> BallCover::path_to_root(int b) const {
    std::vector<int> path{b};
    while (path.back() != u_vertex()) {
        int p = tree_parent[path.back()];
        if (p < 0) throw Disconnected("vertex has no path to U");
        path.push_back(p);
    }
    return path;
}

BallCover build_net(const CellSet& omega_region, const CellSet& u_region,
                    double eps, int n) {
    const GridSpec& s = omega_region.spec;
    double cell_diam = std::hypot(s.dx(), s.dy());
    if (eps <= 2 * cell_diam)
        throw EpsTooSmallForGrid("eps must exceed 2 cell diagonals");

    BallCover cover;
    cover.radius = eps;
    cover.n = n;
    cover.omega_region = omega_region;
    cover.u_region = u_region;

    auto u_cells = u_region.cells();
    auto ball_in_u = [&](double cx, double cy) {
        // A candidate ball lies inside U iff no cell center outside U is
        // within eps of it.
        for (int i = 0; i < s.num_cells(); ++i) {
            if (u_region.mask[i]) continue;
            double dx = s.cell_x(i) - cx, dy = s.cell_y(i) - cy;
            if (dx * dx + dy * dy < eps * eps) return false;
        }
        return true;
    };

    // Greedy maximal eps-separated set over cell centers of omega \ U,
    // row-major order for reproducibility.
    for (int i = 0; i < s.num_cells(); ++i) {
        if (!omega_region.mask[i] || u_region.mask[i]) continue;
        double x = s.cell_x(i), y = s.cell_y(i);
        bool separated = true;
        for (auto& c : cover.centers) {
            double dx = c.x - x, dy = c.y - y;
            if (dx * dx + dy * dy < eps * eps) {
                separated = false;
                break;
            }
        }
        if (separated && !ball_in_u(x, y)) cover.centers.push_back({x, y});
    }

    int m = cover.num_balls();
    cover.adjacency.assign(m + 1, {});
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            double dx = cover.centers[a].x - cover.centers[b].x;
            double dy = cover.centers[a].y - cover.centers[b].y;
            if (dx * dx + dy * dy < 4 * eps * eps) {
                cover.adjacency[a].push_back(b);
                cover.adjacency[b].push_back(a);
            }
        }
    // Ball meets U iff some U cell center is inside the ball.
    for (int b = 0; b < m; ++b) {
        for (int i : u_cells) {
            double dx = s.cell_x(i) - cover.centers[b].x;
            double dy = s.cell_y(i) - cover.centers[b].y;
            if (dx * dx + dy * dy < eps * eps) {
                cover.adjacency[b].push_back(cover.u_vertex());
                cover.adjacency[cover.u_vertex()].push_back(b);
                break;
            }
        }
    }
    return cover;
}

void color_distance2(BallCover& cover) {
    int m = cover.num_balls();
    cover.colors.assign(m, -1);
    for (int b = 0; b < m; ++b) {
        std::vector<bool> used(m + 1, false);
        // Paths through the u vertex count toward graph distance, so its
        // other neighbours are distance-2 from b even though u itself
        // carries no color.
        for (int nb : cover.adjacency[b]) {
            if (nb != cover.u_vertex() && cover.colors[nb] >= 0)
                used[cover.colors[nb]] = true;
            for (int nnb : cover.adjacency[nb]) {
                if (nnb == cover.u_vertex() || nnb == b) continue;
                if (cover.colors[nnb] >= 0) used[cover.colors[nnb]] = true;
            }
        }
        int c = 0;
        while (used[c]) ++c;
        cover.colors[b] = c;
    }
}

std::vector<int> bfs_distances(const BallCover& cover, int source) {
    std::vector<int> dist(cover.num_balls() + 1, -1);
    std::deque<int> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int w : cover.adjacency[v])
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
    }
    return dist;
}

void spanning_tree(BallCover& cover) {
    int m = cover.num_balls();
    cover.tree_parent.assign(m + 1, -1);
    cover.tree_depth.assign(m + 1, -1);
    std::deque<int> queue{cover.u_vertex()};
    cover.tree_depth[cover.u_vertex()] = 0;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int w : cover.adjacency[v])
            if (cover.tree_depth[w] < 0) {
                cover.tree_depth[w] = cover.tree_depth[v] + 1;
                cover.tree_parent[w] = v;
                queue.push_back(w);
            }
    }
    for (int b = 0; b < m; ++b)
        if (cover.tree_depth[b] < 0)
            throw Disconnected("ball cover graph is not connected");
}

} // namespace hamflex
