#include "hamflex/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace hamflex {

namespace {

// Bilinear interpolation of a cell-centered scalar array, zero outside.
double bilin(const GridSpec& s, const std::vector<double>& v, double x,
             double y) {
    double gx = (x - s.x_min) / s.dx() - 0.5;
    double gy = (y - s.y_min) / s.dy() - 0.5;
    int ix = static_cast<int>(std::floor(gx));
    int iy = static_cast<int>(std::floor(gy));
    double wx = gx - ix, wy = gy - iy;
    auto at = [&](int i, int j) -> double {
        if (i < 0 || i >= s.nx || j < 0 || j >= s.ny) return 0.0;
        return v[s.index(i, j)];
    };
    return (1 - wx) * (1 - wy) * at(ix, iy) + wx * (1 - wy) * at(ix + 1, iy) +
           (1 - wx) * wy * at(ix, iy + 1) + wx * wy * at(ix + 1, iy + 1);
}

double area_distortion_of(const GridSpec& s, const std::vector<double>& ddx,
                          const std::vector<double>& ddy) {
    double worst = 0;
#pragma omp parallel for reduction(max : worst)
    for (int iy = 0; iy < s.ny; ++iy) {
        for (int ix = 0; ix < s.nx; ++ix) {
            auto X = [&](int i, int j) {
                i = std::clamp(i, 0, s.nx - 1);
                j = std::clamp(j, 0, s.ny - 1);
                int idx = s.index(i, j);
                return s.cell_x(idx) + ddx[idx];
            };
            auto Y = [&](int i, int j) {
                i = std::clamp(i, 0, s.nx - 1);
                j = std::clamp(j, 0, s.ny - 1);
                int idx = s.index(i, j);
                return s.cell_y(idx) + ddy[idx];
            };
            int il = std::max(ix - 1, 0), ir = std::min(ix + 1, s.nx - 1);
            int jl = std::max(iy - 1, 0), jr = std::min(iy + 1, s.ny - 1);
            double hx = (ir - il) * s.dx(), hy = (jr - jl) * s.dy();
            double dXdx = (X(ir, iy) - X(il, iy)) / hx;
            double dYdx = (Y(ir, iy) - Y(il, iy)) / hx;
            double dXdy = (X(ix, jr) - X(ix, jl)) / hy;
            double dYdy = (Y(ix, jr) - Y(ix, jl)) / hy;
            double det = dXdx * dYdy - dXdy * dYdx;
            worst = std::max(worst, std::fabs(det - 1.0));
        }
    }
    return worst;
}

// Sampled velocity field of a Hamiltonian: (dH/dy, -dH/dx) per time sample.
struct VelocityField {
    GridSpec spec;
    std::vector<std::vector<double>> vx, vy;
    int samples = 0;

    explicit VelocityField(const TimeField& H) {
        H.validate();
        spec = H.spec();
        samples = H.num_samples();
        vx.resize(samples);
        vy.resize(samples);
        for (int k = 0; k < samples; ++k) {
            const GridField& f = H.fields[k];
            vx[k].assign(spec.num_cells(), 0.0);
            vy[k].assign(spec.num_cells(), 0.0);
            for (int iy = 0; iy < spec.ny; ++iy) {
                for (int ix = 0; ix < spec.nx; ++ix) {
                    int jl = std::max(iy - 1, 0), jr = std::min(iy + 1, spec.ny - 1);
                    int il = std::max(ix - 1, 0), ir = std::min(ix + 1, spec.nx - 1);
                    double dHdy = (f[spec.index(ix, jr)] - f[spec.index(ix, jl)]) /
                                  ((jr - jl) * spec.dy());
                    double dHdx = (f[spec.index(ir, iy)] - f[spec.index(il, iy)]) /
                                  ((ir - il) * spec.dx());
                    vx[k][spec.index(ix, iy)] = dHdy;
                    vy[k][spec.index(ix, iy)] = -dHdx;
                }
            }
        }
    }

    void at(double t, double x, double y, double& ox, double& oy) const {
        t = std::clamp(t, 0.0, 1.0);
        double g = t * (samples - 1);
        int k = std::min(static_cast<int>(g), samples - 2);
        double w = g - k;
        ox = (1 - w) * bilin(spec, vx[k], x, y) + w * bilin(spec, vx[k + 1], x, y);
        oy = (1 - w) * bilin(spec, vy[k], x, y) + w * bilin(spec, vy[k + 1], x, y);
    }
};

// One RK4 trajectory over [0,1] (sign +1) or its time reversal (sign -1).
// Returns the largest single-step displacement encountered.
double rk4_trajectory(const VelocityField& vel, double sign, int steps,
                      double& x, double& y) {
    double dt = 1.0 / steps;
    double max_step = 0;
    for (int s = 0; s < steps; ++s) {
        double t0 = sign > 0 ? s * dt : 1.0 - s * dt;
        double h = sign * dt;
        double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
        vel.at(t0, x, y, k1x, k1y);
        vel.at(t0 + h / 2, x + h / 2 * k1x, y + h / 2 * k1y, k2x, k2y);
        vel.at(t0 + h / 2, x + h / 2 * k2x, y + h / 2 * k2y, k3x, k3y);
        vel.at(t0 + h, x + h * k3x, y + h * k3y, k4x, k4y);
        double sx = h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        double sy = h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
        x += sx;
        y += sy;
        max_step = std::max(max_step, std::hypot(sx, sy));
    }
    return max_step;
}

FlowMap integrate_nodes(const VelocityField& vel, int steps, bool parallel) {
    const GridSpec& s = vel.spec;
    FlowMap m = FlowMap::identity(s);
    double cell = std::max(s.dx(), s.dy());
    double worst_step = 0;
#pragma omp parallel for reduction(max : worst_step) if (parallel)
    for (int idx = 0; idx < s.num_cells(); ++idx) {
        double x = s.cell_x(idx), y = s.cell_y(idx);
        double ms = rk4_trajectory(vel, +1, steps, x, y);
        m.fwd_dx[idx] = x - s.cell_x(idx);
        m.fwd_dy[idx] = y - s.cell_y(idx);
        x = s.cell_x(idx);
        y = s.cell_y(idx);
        ms = std::max(ms, rk4_trajectory(vel, -1, steps, x, y));
        m.bwd_dx[idx] = x - s.cell_x(idx);
        m.bwd_dy[idx] = y - s.cell_y(idx);
        worst_step = std::max(worst_step, ms);
    }
    if (worst_step > cell) {
        throw CFLViolation("integration step moved " + std::to_string(worst_step) +
                           " > one cell (" + std::to_string(cell) +
                           "); increase the step count");
    }
    m.area_distortion = area_distortion_of(s, m.fwd_dx, m.fwd_dy);
    return m;
}

} // namespace

FlowMap FlowMap::identity(const GridSpec& s) {
    FlowMap m;
    m.spec = s;
    int n = s.num_cells();
    m.fwd_dx.assign(n, 0.0);
    m.fwd_dy.assign(n, 0.0);
    m.bwd_dx.assign(n, 0.0);
    m.bwd_dy.assign(n, 0.0);
    return m;
}

void FlowMap::forward_point(double x, double y, double& ox, double& oy) const {
    ox = x + bilin(spec, fwd_dx, x, y);
    oy = y + bilin(spec, fwd_dy, x, y);
}

void FlowMap::backward_point(double x, double y, double& ox, double& oy) const {
    ox = x + bilin(spec, bwd_dx, x, y);
    oy = y + bilin(spec, bwd_dy, x, y);
}

FlowMap FlowMap::inverse() const {
    FlowMap m = *this;
    std::swap(m.fwd_dx, m.bwd_dx);
    std::swap(m.fwd_dy, m.bwd_dy);
    m.area_distortion = area_distortion_of(m.spec, m.fwd_dx, m.fwd_dy);
    return m;
}

double FlowMap::roundtrip_error() const {
    double worst = 0;
#pragma omp parallel for reduction(max : worst)
    for (int idx = 0; idx < spec.num_cells(); ++idx) {
        double x = spec.cell_x(idx), y = spec.cell_y(idx);
        double fx, fy, bx, by;
        forward_point(x, y, fx, fy);
        backward_point(fx, fy, bx, by);
        worst = std::max(worst, std::hypot(bx - x, by - y));
    }
    return worst;
}

FlowMap compose(const FlowMap& a, const FlowMap& b) {
    if (a.spec != b.spec) throw SpecMismatch("compose: flow maps on different grids");
    FlowMap m = FlowMap::identity(a.spec);
    const GridSpec& s = a.spec;
#pragma omp parallel for
    for (int idx = 0; idx < s.num_cells(); ++idx) {
        double x = s.cell_x(idx), y = s.cell_y(idx);
        double qx, qy, rx, ry;
        a.forward_point(x, y, qx, qy);
        b.forward_point(qx, qy, rx, ry);
        m.fwd_dx[idx] = rx - x;
        m.fwd_dy[idx] = ry - y;
        b.backward_point(x, y, qx, qy);
        a.backward_point(qx, qy, rx, ry);
        m.bwd_dx[idx] = rx - x;
        m.bwd_dy[idx] = ry - y;
    }
    m.area_distortion = area_distortion_of(s, m.fwd_dx, m.fwd_dy);
    return m;
}

FlowMap compose_all(const std::vector<const FlowMap*>& maps) {
    if (maps.empty()) throw SpecMismatch("compose_all: empty list");
    FlowMap acc = *maps.front();
    for (std::size_t i = 1; i < maps.size(); ++i) acc = compose(acc, *maps[i]);
    return acc;
}

FlowMap group_product(const std::vector<const FlowMap*>& maps) {
    std::vector<const FlowMap*> rev(maps.rbegin(), maps.rend());
    return compose_all(rev);
}

double map_distance(const FlowMap& a, const FlowMap& b) {
    if (a.spec != b.spec) throw SpecMismatch("map_distance: different grids");
    double worst = 0;
#pragma omp parallel for reduction(max : worst)
    for (int idx = 0; idx < a.spec.num_cells(); ++idx) {
        worst = std::max(worst, std::hypot(a.fwd_dx[idx] - b.fwd_dx[idx],
                                           a.fwd_dy[idx] - b.fwd_dy[idx]));
    }
    return worst;
}

FlowMap integrate(const TimeField& H, int steps) {
    if (steps < 1) throw SpecMismatch("integrate: steps must be positive");
    VelocityField vel(H);
    return integrate_nodes(vel, steps, true);
}

namespace {

FlowMap integrate_interval_vel(const VelocityField& vel, double t0, double t1,
                               int steps) {
    const GridSpec& s = vel.spec;
    FlowMap m = FlowMap::identity(s);
    double cell = std::max(s.dx(), s.dy());
    double dt = (t1 - t0) / steps;
    double worst_step = 0;
#pragma omp parallel for reduction(max : worst_step)
    for (int idx = 0; idx < s.num_cells(); ++idx) {
        for (int dir = 0; dir < 2; ++dir) {
            double x = s.cell_x(idx), y = s.cell_y(idx);
            double h = dir == 0 ? dt : -dt;
            for (int st = 0; st < steps; ++st) {
                double tc = dir == 0 ? t0 + st * dt : t1 - st * dt;
                double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
                vel.at(tc, x, y, k1x, k1y);
                vel.at(tc + h / 2, x + h / 2 * k1x, y + h / 2 * k1y, k2x, k2y);
                vel.at(tc + h / 2, x + h / 2 * k2x, y + h / 2 * k2y, k3x, k3y);
                vel.at(tc + h, x + h * k3x, y + h * k3y, k4x, k4y);
                double sx = h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
                double sy = h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
                x += sx;
                y += sy;
                worst_step = std::max(worst_step, std::hypot(sx, sy));
            }
            if (dir == 0) {
                m.fwd_dx[idx] = x - s.cell_x(idx);
                m.fwd_dy[idx] = y - s.cell_y(idx);
            } else {
                m.bwd_dx[idx] = x - s.cell_x(idx);
                m.bwd_dy[idx] = y - s.cell_y(idx);
            }
        }
    }
    if (worst_step > cell) {
        throw CFLViolation("integration step moved " + std::to_string(worst_step) +
                           " > one cell; increase the step count");
    }
    m.area_distortion = area_distortion_of(s, m.fwd_dx, m.fwd_dy);
    return m;
}

} // namespace

FlowMap integrate_interval(const TimeField& H, double t0, double t1, int steps) {
    if (steps < 1) throw SpecMismatch("integrate_interval: steps must be positive");
    if (!(0.0 <= t0 && t0 < t1 && t1 <= 1.0))
        throw SpecMismatch("integrate_interval: need 0 <= t0 < t1 <= 1");
    VelocityField vel(H);
    return integrate_interval_vel(vel, t0, t1, steps);
}

std::vector<FlowMap> integrate_partials(const TimeField& H,
                                        int steps_per_sample) {
    if (steps_per_sample < 1)
        throw SpecMismatch("integrate_partials: steps must be positive");
    VelocityField vel(H);
    int T = H.num_samples();
    std::vector<FlowMap> out;
    out.reserve(T);
    out.push_back(FlowMap::identity(vel.spec));
    for (int k = 0; k + 1 < T; ++k) {
        FlowMap step = integrate_interval_vel(vel, H.t_of(k), H.t_of(k + 1),
                                              steps_per_sample);
        out.push_back(compose(out.back(), step));
    }
    return out;
}

FlowMap integrate(const GridField& H, int steps) {
    TimeField tf(H.spec, 2);
    tf.fields[0] = H;
    tf.fields[1] = H;
    return integrate(tf, steps);
}

namespace serial {

FlowMap integrate(const TimeField& H, int steps) {
    if (steps < 1) throw SpecMismatch("integrate: steps must be positive");
    VelocityField vel(H);
    return integrate_nodes(vel, steps, false);
}

GridField pullback(const GridField& f, const FlowMap& phi) {
    if (f.spec != phi.spec) throw SpecMismatch("pullback: different grids");
    GridField out(f.spec);
    out.support_tol = f.support_tol;
    for (int idx = 0; idx < f.spec.num_cells(); ++idx) {
        double x, y;
        phi.backward_point(f.spec.cell_x(idx), f.spec.cell_y(idx), x, y);
        out[idx] = f.sample(x, y);
    }
    return out;
}

} // namespace serial

GridField pullback(const GridField& f, const FlowMap& phi) {
    if (f.spec != phi.spec) throw SpecMismatch("pullback: different grids");
    GridField out(f.spec);
    out.support_tol = f.support_tol;
#pragma omp parallel for
    for (int idx = 0; idx < f.spec.num_cells(); ++idx) {
        double x, y;
        phi.backward_point(f.spec.cell_x(idx), f.spec.cell_y(idx), x, y);
        out[idx] = f.sample(x, y);
    }
    return out;
}

TranslationResult translate_cube(const CubeRoute& route, const GridSpec& spec,
                                 int clearance, int steps_per_segment) {
    if (route.waypoints.empty())
        throw SpecMismatch("translate_cube: route needs at least one waypoint");
    const int ramp = std::max(3, clearance * 3);
    double pitch = std::min(spec.dx(), spec.dy());

    TranslationResult res;
    res.flow = FlowMap::identity(spec);
    std::vector<GridField> seg_fields;

    for (std::size_t w = 0; w + 1 < route.waypoints.size(); ++w) {
        const Waypoint& p0 = route.waypoints[w];
        const Waypoint& p1 = route.waypoints[w + 1];
        double dxv = p1.x - p0.x, dyv = p1.y - p0.y;
        double len = std::hypot(dxv, dyv);
        if (len < 1e-12 * pitch) continue;

        // Plateau: the cube footprint swept along the segment, padded by
        // `clearance` cells; the generator is linear there, so the flow is
        // an exact translation of the cube.
        CellSet plateau(spec);
        double pad = route.cube.half_side + clearance * pitch;
        int nsamp = std::max(2, static_cast<int>(std::ceil(len / (0.5 * pitch))) + 1);
        for (int k = 0; k < nsamp; ++k) {
            double t = static_cast<double>(k) / (nsamp - 1);
            double cx = p0.x + t * dxv, cy = p0.y + t * dyv;
            int ix0 = std::max(0, static_cast<int>((cx - pad - spec.x_min) / spec.dx()));
            int ix1 = std::min(spec.nx - 1,
                               static_cast<int>((cx + pad - spec.x_min) / spec.dx()));
            int iy0 = std::max(0, static_cast<int>((cy - pad - spec.y_min) / spec.dy()));
            int iy1 = std::min(spec.ny - 1,
                               static_cast<int>((cy + pad - spec.y_min) / spec.dy()));
            for (int iy = iy0; iy <= iy1; ++iy)
                for (int ix = ix0; ix <= ix1; ++ix)
                    plateau.insert(spec.index(ix, iy));
        }

        // Feather chi linearly to zero over `ramp` rings outside the plateau.
        GridField chi(spec);
        CellSet inner = plateau;
        for (int idx : plateau.cells()) chi[idx] = 1.0;
        for (int r = 1; r <= ramp; ++r) {
            CellSet outer = inner.dilate(1);
            double v = 1.0 - static_cast<double>(r) / (ramp + 1);
            for (int idx : outer.cells())
                if (!inner.contains(idx)) chi[idx] = v;
            inner = outer;
        }

        double xc = 0.5 * (p0.x + p1.x), yc = 0.5 * (p0.y + p1.y);
        GridField H(spec);
        for (int idx = 0; idx < spec.num_cells(); ++idx) {
            if (chi[idx] == 0.0) continue;
            double x = spec.cell_x(idx), y = spec.cell_y(idx);
            H[idx] = chi[idx] * (dxv * (y - yc) - dyv * (x - xc));
        }

        int steps = steps_per_segment;
        double cell = std::max(spec.dx(), spec.dy());
        // The ramp rings move faster than the plateau; bound the speed by
        // the measured gradient and keep each step under half a cell.
        double vmax = std::max(len, gradient_sup(H));
        steps = std::max(steps, static_cast<int>(std::ceil(vmax / (0.5 * cell))));
        FlowMap seg = integrate(H, steps);
        res.flow = compose(res.flow, seg);
        res.segment_costs.push_back(sup_norm(H));
        res.hofer_cost += res.segment_costs.back();
        seg_fields.push_back(std::move(H));
    }

    // Informational time-dependent generator: segment k active on
    // [k/K,(k+1)/K], scaled by the segment count so the time-1 flow matches.
    int K = static_cast<int>(seg_fields.size());
    if (K == 0) {
        res.generator = TimeField(spec, 2);
    } else {
        res.generator = TimeField(spec, K + 1);
        for (int k = 0; k <= K; ++k) {
            const GridField& src = seg_fields[std::min(k, K - 1)];
            GridField scaled(spec);
            for (int idx = 0; idx < spec.num_cells(); ++idx)
                scaled[idx] = K * src[idx];
            res.generator.fields[k] = std::move(scaled);
        }
    }
    return res;
}

ConjugationReport conjugation_identities(const SikoravData& data,
                                         double tolerance) {
    const int N = static_cast<int>(data.f.size()) - 1;
    if (N < 1) throw SpecMismatch("conjugation_identities: need at least two maps");
    if (data.phi.size() != data.f.size())
        throw SpecMismatch("conjugation_identities: one chart map per cube map");
    const bool odd = (N % 2) != 0;
    const int L = odd ? (N - 1) / 2 : N / 2;
    const int Lp = odd ? L : L - 1;  // pairs (2i, 2i+1) actually formed

    const FlowMap psi_inv = data.psi.inverse();
    const FlowMap psi_p_inv = data.psi_prime.inverse();

    // g_i = f_{2i} Psi^{-1} f_{2i+1} Psi  (f_N alone when N is even).
    std::vector<FlowMap> g;
    for (int i = 0; i <= L; ++i) {
        if (!odd && i == L) {
            g.push_back(data.f[N]);
        } else {
            g.push_back(group_product(
                {&data.f[2 * i], &psi_inv, &data.f[2 * i + 1], &data.psi}));
        }
    }

    std::vector<const FlowMap*> all_f;
    for (const FlowMap& m : data.f) all_f.push_back(&m);
    const FlowMap Phi = group_product(all_f);

    std::vector<const FlowMap*> gp;
    for (const FlowMap& m : g) gp.push_back(&m);
    const FlowMap PhiTilde = group_product(gp);

    // Identity 1:
    //   Phi^{-1} PhiTilde = P^{-1} Psi^{-1} P Psi,  P = prod of odd-index f.
    std::vector<const FlowMap*> odd_f;
    for (int i = 0; i <= Lp; ++i) odd_f.push_back(&data.f[2 * i + 1]);
    const FlowMap P = group_product(odd_f);
    const FlowMap P_inv = P.inverse();
    const FlowMap lhs1 = compose(PhiTilde, Phi.inverse());
    const FlowMap rhs1 = group_product({&P_inv, &psi_inv, &P, &data.psi});

    // ghat_i = phi_{2i}^* g_i, hhat_i = prod_{j=i}^L ghat_j,
    // h_{2i} = (phi_{2i})_* hhat_i, h_{2i-1} = (phi_{2i-1})_* hhat_i^{-1}.
    std::vector<FlowMap> ghat;
    for (int i = 0; i <= L; ++i) {
        const FlowMap inv = data.phi[2 * i].inverse();
        ghat.push_back(group_product({&inv, &g[i], &data.phi[2 * i]}));
    }
    std::vector<FlowMap> hhat(L + 1);
    hhat[L] = ghat[L];
    for (int i = L - 1; i >= 0; --i) hhat[i] = compose(hhat[i + 1], ghat[i]);

    std::vector<FlowMap> h(2 * L + 1);
    for (int i = 0; i <= L; ++i) {
        const FlowMap inv = data.phi[2 * i].inverse();
        h[2 * i] = group_product({&data.phi[2 * i], &hhat[i], &inv});
    }
    for (int i = 1; i <= L; ++i) {
        const FlowMap hinv = hhat[i].inverse();
        const FlowMap inv = data.phi[2 * i - 1].inverse();
        h[2 * i - 1] = group_product({&data.phi[2 * i - 1], &hinv, &inv});
    }

    std::vector<const FlowMap*> hp;
    for (const FlowMap& m : h) hp.push_back(&m);
    const FlowMap PhiHat = group_product(hp);

    std::vector<const FlowMap*> odd_h;
    for (int i = 1; i <= L; ++i) odd_h.push_back(&h[2 * i - 1]);

    ConjugationReport rep;
    rep.residual_1 = map_distance(lhs1, rhs1);

    if (!odd_h.empty()) {
        const FlowMap Hh = group_product(odd_h);
        const FlowMap Hh_inv = Hh.inverse();
        // Identity 2: PhiTilde^{-1} PhiHat = Psi^{-1} H^{-1} Psi H.
        // (The h_{2i-1} are Psi-conjugates of the hhat_i^{-1} blocks, so the
        // quotient collapses to a commutator of H with Psi.)
        const FlowMap lhs2 = compose(PhiHat, PhiTilde.inverse());
        const FlowMap rhs2 = group_product({&psi_inv, &Hh_inv, &data.psi, &Hh});
        rep.residual_2 = map_distance(lhs2, rhs2);
        // Identity 3: (Phi')^{-1} PhiHat = H Psi' H^{-1} (Psi')^{-1},
        // Phi' = h_0.
        const FlowMap lhs3 = compose(PhiHat, h[0].inverse());
        const FlowMap rhs3 =
            group_product({&Hh, &data.psi_prime, &Hh_inv, &psi_p_inv});
        rep.residual_3 = map_distance(lhs3, rhs3);
    } else {
        // L = 0: both sides of identities 2 and 3 are the identity map.
        rep.residual_2 = map_distance(PhiHat, PhiTilde);
        rep.residual_3 = map_distance(PhiHat, h[0]);
    }

    rep.delta = std::max(data.psi_cost, data.psi_prime_cost);
    rep.cost_ledger = 2 * data.psi_cost + 2 * data.psi_cost + 2 * data.psi_prime_cost;
    rep.ledger_ok = rep.cost_ledger <= 6 * rep.delta + 1e-12;

    double worst = std::max({rep.residual_1, rep.residual_2, rep.residual_3});
    if (worst > tolerance) {
        throw IdentityMismatch("factorization residual " + std::to_string(worst) +
                               " exceeds tolerance " + std::to_string(tolerance));
    }
    return rep;
}

std::optional<std::vector<OracleTerm>> CandidateListOracle::solve(
    const GridField& f, const GridField& u, const Cube& window) {
    if (terms_.empty()) return std::nullopt;
    GridField sum(f.spec);
    for (const OracleTerm& t : terms_) {
        if (t.flow.spec != f.spec) return std::nullopt;
        GridField pb = pullback(u, t.flow);
        for (int idx = 0; idx < f.spec.num_cells(); ++idx)
            sum[idx] += t.sign * pb[idx];
    }
    double resid = 0;
    for (int idx = 0; idx < f.spec.num_cells(); ++idx)
        resid = std::max(resid, std::fabs(sum[idx] - f[idx]));
    if (resid > tolerance_) return std::nullopt;

    // Contract: flows must act inside the 8x-enlarged window.
    Cube big{window.cx, window.cy, 8 * window.half_side, -1};
    for (const OracleTerm& t : terms_) {
        for (int idx = 0; idx < f.spec.num_cells(); ++idx) {
            double d = std::hypot(t.flow.fwd_dx[idx], t.flow.fwd_dy[idx]);
            if (d > tolerance_ &&
                !big.contains(f.spec.cell_x(idx), f.spec.cell_y(idx)))
                return std::nullopt;
        }
    }
    return terms_;
}

void write_fm1_file(const std::string& path, const FlowMap& m) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    char buf[128];
    os << "FM1 " << m.spec.nx << ' ' << m.spec.ny;
    for (double v : {m.spec.x_min, m.spec.x_max, m.spec.y_min, m.spec.y_max,
                     m.area_distortion}) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        os << buf;
    }
    os << '\n';
    for (int idx = 0; idx < m.spec.num_cells(); ++idx) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", m.fwd_dx[idx],
                      m.fwd_dy[idx], m.bwd_dx[idx], m.bwd_dy[idx]);
        os << buf;
    }
    if (!os) throw IoError("write failed: " + path);
}

FlowMap read_fm1_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::string magic;
    GridSpec s;
    double ad = 0;
    is >> magic;
    if (magic != "FM1") throw IoError(path + ": bad magic '" + magic + "'");
    is >> s.nx >> s.ny >> s.x_min >> s.x_max >> s.y_min >> s.y_max >> ad;
    if (!is || s.nx < 1 || s.ny < 1) throw IoError(path + ": bad header");
    FlowMap m = FlowMap::identity(s);
    m.area_distortion = ad;
    for (int idx = 0; idx < s.num_cells(); ++idx) {
        is >> m.fwd_dx[idx] >> m.fwd_dy[idx] >> m.bwd_dx[idx] >> m.bwd_dy[idx];
    }
    if (!is) throw IoError(path + ": truncated data");
    return m;
}

} // namespace hamflex
