#include "hamflex/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hamflex {

namespace {

// Leaf numbering: each ball gets the smallest leaf index whose root path
// contains it.
std::vector<int> leaf_numbers(const BallCover& cover) {
    int m = cover.num_balls();
    std::vector<bool> has_child(m + 1, false);
    for (int b = 0; b < m; ++b)
        if (cover.tree_parent[b] >= 0) has_child[cover.tree_parent[b]] = true;

    std::vector<int> leaf(m + 1, -1);
    int next_leaf = 1;
    for (int b = 0; b < m; ++b) {
        if (has_child[b]) continue;
        int id = next_leaf++;
        for (int v : cover.path_to_root(b))
            if (leaf[v] < 0) leaf[v] = id;
    }
    return leaf;
}

} // namespace

std::vector<CubeOrderKey> order_keys(const CubeCover& families,
                                     const BallCover& cover) {
    if (cover.tree_depth.empty())
        throw SpecMismatch("order_cubes needs a spanning tree");
    auto leaf = leaf_numbers(cover);

    auto cubes = all_cubes(families);
    // Within-ball rank: row-major over cube centers.
    std::vector<int> idx(cubes.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        const Cube &qa = cubes[a], &qb = cubes[b];
        if (qa.host_ball != qb.host_ball) return qa.host_ball < qb.host_ball;
        if (qa.cy != qb.cy) return qa.cy < qb.cy;
        return qa.cx < qb.cx;
    });
    std::vector<int> rank(cubes.size());
    int r = 0, prev_ball = -1;
    for (int i : idx) {
        if (cubes[i].host_ball != prev_ball) r = 0;
        prev_ball = cubes[i].host_ball;
        rank[i] = r++;
    }

    std::vector<CubeOrderKey> keys(cubes.size());
    for (size_t i = 0; i < cubes.size(); ++i) {
        int b = cubes[i].host_ball;
        if (b < 0 || b >= cover.num_balls())
            throw UnhostedCube("cube has no host ball");
        keys[i] = CubeOrderKey{leaf[b], cover.tree_depth[b], rank[i]};
    }
    return keys;
}

std::vector<Cube> order_cubes(const CubeCover& families,
                              const BallCover& cover) {
    auto cubes = all_cubes(families);
    auto keys = order_keys(families, cover);
    std::vector<int> idx(cubes.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return keys[a] < keys[b]; });
    std::vector<Cube> out;
    out.reserve(cubes.size());
    for (int i : idx) out.push_back(cubes[i]);
    return out;
}

std::vector<std::vector<int>> partition_families(const std::vector<Cube>& ordered,
                                                 double L, double supp_vol,
                                                 int n) {
    double cell = std::pow(2 * L, 2 * n);
    double capacity = 0.5 * cell;
    (void)supp_vol;
    std::vector<std::vector<int>> bins;
    double fill = 0;
    for (int i = 0; i < (int)ordered.size(); ++i) {
        double v = ordered[i].volume();
        if (v > capacity)
            throw CubeTooLarge("cube volume exceeds half of Vol(Q_L)");
        if (bins.empty() || fill + v > capacity) {
            bins.emplace_back();
            fill = 0;
        }
        bins.back().push_back(i);
        fill += v;
    }
    return bins;
}

CellSet swept_region(const CubeRoute& route, const GridSpec& spec,
                     int clearance_cells) {
    CellSet out(spec);
    double step = 0.5 * std::min(spec.dx(), spec.dy());
    auto stamp = [&](double cx, double cy) {
        double h = route.cube.half_side;
        int ix0 = std::max(0, (int)std::floor((cx - h - spec.x_min) / spec.dx()) - 1);
        int ix1 = std::min(spec.nx - 1,
                           (int)std::ceil((cx + h - spec.x_min) / spec.dx()) + 1);
        int iy0 = std::max(0, (int)std::floor((cy - h - spec.y_min) / spec.dy()) - 1);
        int iy1 = std::min(spec.ny - 1,
                           (int)std::ceil((cy + h - spec.y_min) / spec.dy()) + 1);
        for (int iy = iy0; iy <= iy1; ++iy)
            for (int ix = ix0; ix <= ix1; ++ix) {
                double x = spec.x_min + (ix + 0.5) * spec.dx();
                double y = spec.y_min + (iy + 0.5) * spec.dy();
                if (std::fabs(x - cx) < h && std::fabs(y - cy) < h)
                    out.insert(spec.index(ix, iy));
            }
    };
    for (size_t i = 0; i + 1 < route.waypoints.size(); ++i) {
        const Waypoint &a = route.waypoints[i], &b = route.waypoints[i + 1];
        double len = std::hypot(b.x - a.x, b.y - a.y);
        int nsteps = std::max(1, (int)std::ceil(len / step));
        for (int k = 0; k <= nsteps; ++k) {
            double t = double(k) / nsteps;
            stamp(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
        }
    }
    return clearance_cells > 0 ? out.dilate(clearance_cells) : out;
}

namespace {

Waypoint u_centroid(const BallCover& cover) {
    auto cells = cover.u_region.cells();
    if (cells.empty()) throw SpecMismatch("empty U region");
    Waypoint w;
    for (int c : cells) {
        w.x += cover.u_region.spec.cell_x(c);
        w.y += cover.u_region.spec.cell_y(c);
    }
    w.x /= cells.size();
    w.y /= cells.size();
    return w;
}

} // namespace

std::vector<CubeRoute> plan_routes(const std::vector<Cube>& family,
                                   const BallCover& cover,
                                   const Cube& q_target,
                                   const std::vector<CellSet>& obstacles) {
    const GridSpec& spec = cover.u_region.spec;
    Waypoint u_center = u_centroid(cover);

    // Shelf packing inside q_target, bottom-left to top-right.
    double x0 = q_target.cx - q_target.half_side;
    double y0 = q_target.cy - q_target.half_side;
    double x1 = q_target.cx + q_target.half_side;
    double y1 = q_target.cy + q_target.half_side;
    double cur_x = x0, cur_y = y0, row_h = 0;

    // Cubes are transported one at a time, so a corridor must clear every
    // cube of the family still awaiting transport, plus the fixed obstacles.
    // The transport order is chosen greedily: at each step take the first
    // remaining cube with an unobstructed corridor.
    std::vector<CubeRoute> routes;
    std::vector<bool> moved(family.size(), false);
    for (size_t step = 0; step < family.size(); ++step) {
        bool placed = false;
        for (size_t i = 0; i < family.size() && !placed; ++i) {
            if (moved[i]) continue;
            const Cube& q = family[i];
            double w = 2 * q.half_side;
            double try_x = cur_x, try_y = cur_y, try_row = row_h;
            if (try_x + w > x1 + 1e-12) {  // new shelf row
                try_x = x0;
                try_y += try_row;
                try_row = 0;
            }
            if (try_x + w > x1 + 1e-12 || try_y + w > y1 + 1e-12)
                throw NoFreeSlot("shelf packing overflows Q_L");
            Cube slot = q;
            slot.cx = try_x + q.half_side;
            slot.cy = try_y + q.half_side;
            slot.host_ball = -1;

            CubeRoute route;
            route.cube = q;
            route.target = slot;
            route.waypoints.push_back({q.cx, q.cy});
            for (int v : cover.path_to_root(q.host_ball)) {
                if (v == cover.u_vertex()) break;
                route.waypoints.push_back(
                    {cover.centers[v].x, cover.centers[v].y});
            }
            route.waypoints.push_back(u_center);
            route.waypoints.push_back({slot.cx, slot.cy});

            CellSet tube = swept_region(route, spec, 1);
            bool clear = true;
            for (size_t j = 0; j < family.size() && clear; ++j)
                if (j != i && !moved[j] &&
                    !tube.disjoint_from(family[j].cells(spec)))
                    clear = false;
            for (auto& obs : obstacles)
                if (clear && !tube.disjoint_from(obs)) clear = false;
            if (!clear) continue;

            cur_x = try_x + w;
            cur_y = try_y;
            row_h = std::max(try_row, w);
            moved[i] = true;
            routes.push_back(std::move(route));
            placed = true;
        }
        if (!placed)
            throw BlockedRoute(
                "every remaining corridor meets an untransported cube or an "
                "obstacle");
    }
    return routes;
}

TransportPlan plan_transport(const CubeCover& families, const BallCover& cover,
                             const Cube& q_target, double L, double supp_vol,
                             int n, const std::vector<CellSet>& obstacles) {
    TransportPlan plan;
    plan.family_capacity = 0.5 * std::pow(2 * L, 2 * n);
    plan.n_l = (int)std::ceil(3.0 * supp_vol / std::pow(2 * L, 2 * n));
    // Transport families never mix lattice classes: cubes of one
    // (color, shift) class are pairwise disjoint, which is what lets a
    // corridor thread between the cubes still waiting their turn.
    for (const auto& [key, fam] : families) {
        CubeCover one;
        one[key] = fam;
        std::vector<Cube> ordered = order_cubes(one, cover);

        // Pack cubes into families up to the volume capacity, additionally
        // starting a fresh family whenever the candidate cube cannot be
        // scheduled with corridors clear of its family-mates.
        std::vector<std::vector<Cube>> bins;
        std::vector<Cube> cur;
        double fill = 0;
        for (const Cube& q : ordered) {
            double v = q.volume();
            if (v > plan.family_capacity)
                throw CubeTooLarge("cube volume exceeds half of Vol(Q_L)");
            bool fits = !cur.empty() && fill + v <= plan.family_capacity;
            if (fits) {
                std::vector<Cube> trial = cur;
                trial.push_back(q);
                try {
                    plan_routes(trial, cover, q_target, obstacles);
                } catch (const BlockedRoute&) {
                    fits = false;
                }
            }
            if (!fits && !cur.empty()) {
                bins.push_back(std::move(cur));
                cur.clear();
                fill = 0;
            }
            cur.push_back(q);
            fill += v;
        }
        if (!cur.empty()) bins.push_back(std::move(cur));

        for (auto& bin : bins) {
            auto routes = plan_routes(bin, cover, q_target, obstacles);
            std::vector<int> idxs;
            for (const Cube& q : bin) {
                idxs.push_back(static_cast<int>(plan.order.size()));
                plan.order.push_back(q);
            }
            plan.families.push_back(std::move(idxs));
            plan.routes.insert(plan.routes.end(), routes.begin(), routes.end());
        }
    }
    return plan;
}

} // namespace hamflex
