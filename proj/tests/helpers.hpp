#ifndef HAMFLEX_TEST_HELPERS_HPP
#define HAMFLEX_TEST_HELPERS_HPP

#include <cmath>
#include <random>

#include "hamflex/field.hpp"

namespace hamflex::testing {

/// Smooth compactly supported cosine bump of the given amplitude.
inline GridField make_bump(const GridSpec& s, double cx, double cy, double r,
                           double amp) {
    GridField f(s);
    for (int i = 0; i < s.num_cells(); ++i) {
        double d = std::hypot(s.cell_x(i) - cx, s.cell_y(i) - cy);
        if (d < r) {
            double c = std::cos(0.5 * M_PI * d / r);
            f[i] = amp * c * c;
        }
    }
    return f;
}

/// Sum of a few random interior bumps; boundary ring stays zero.
inline GridField random_smooth_field(const GridSpec& s, unsigned seed,
                                     int bumps = 4, double amp = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ux(s.x_min, s.x_max);
    std::uniform_real_distribution<double> uy(s.y_min, s.y_max);
    std::uniform_real_distribution<double> ua(-amp, amp);
    double margin_x = 0.25 * (s.x_max - s.x_min);
    double margin_y = 0.25 * (s.y_max - s.y_min);
    GridField f(s);
    for (int b = 0; b < bumps; ++b) {
        double cx = std::clamp(ux(rng), s.x_min + margin_x, s.x_max - margin_x);
        double cy = std::clamp(uy(rng), s.y_min + margin_y, s.y_max - margin_y);
        double r = 0.1 * (s.x_max - s.x_min) * (0.5 + 0.5 * (b + 1.0) / bumps);
        GridField g = make_bump(s, cx, cy, r, ua(rng));
        for (int i = 0; i < s.num_cells(); ++i) f[i] += g[i];
    }
    return f;
}

/// Exactly zero-mean field by antisymmetrizing in x (needs nx even and a
/// symmetric box), scaled so sup + L1 norm is below `budget`.
inline GridField admissible_zero_mean(const GridSpec& s, unsigned seed,
                                      double budget = 0.999) {
    GridField g = random_smooth_field(s, seed);
    GridField f(s);
    for (int iy = 0; iy < s.ny; ++iy)
        for (int ix = 0; ix < s.nx; ++ix) {
            int i = s.index(ix, iy), m = s.index(s.nx - 1 - ix, iy);
            f[i] = 0.5 * (g[i] - g[m]);
        }
    double w = sup_norm(f) + l1_norm(f);
    if (w > 0)
        for (int i = 0; i < s.num_cells(); ++i) f[i] *= budget / w;
    return f;
}

/// Rotation benchmark field: angular velocity 1 inside r_in, smoothstepped
/// to 0 at r_out, H(r) = -int_r^{r_out} omega(s) s ds. Inside r_in the
/// time-1 flow is the exact rotation by angle 1; the velocity vanishes
/// outside r_out.
inline GridField rotation_field(const GridSpec& s, double r_in = 1.2,
                                double r_out = 3.8) {
    auto omega = [&](double r) {
        if (r <= r_in) return 1.0;
        if (r >= r_out) return 0.0;
        double u = (r - r_in) / (r_out - r_in);
        return 1.0 - u * u * (3 - 2 * u);
    };
    // Radial profile by fine trapezoid quadrature, H(r_out) = 0.
    const int M = 20000;
    std::vector<double> prof(M + 1, 0.0);
    double dr = r_out / M;
    for (int k = M - 1; k >= 0; --k) {
        double r1 = (k + 1) * dr, r0 = k * dr;
        prof[k] = prof[k + 1] - 0.5 * (omega(r0) * r0 + omega(r1) * r1) * dr;
    }
    GridField H(s);
    for (int i = 0; i < s.num_cells(); ++i) {
        double r = std::hypot(s.cell_x(i), s.cell_y(i));
        if (r >= r_out) continue;
        double t = r / dr;
        int k = std::min(M - 1, (int)t);
        double w = t - k;
        H[i] = (1 - w) * prof[k] + w * prof[k + 1];
    }
    return H;
}

/// Zero-mean time-dependent Hamiltonian with smooth time modulation.
inline TimeField random_time_field(const GridSpec& s, unsigned seed,
                                   int samples, double amp = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uph(0, 2 * M_PI);
    double p1 = uph(rng), p2 = uph(rng);
    GridField base = random_smooth_field(s, seed + 1, 3, amp);
    GridField base2 = random_smooth_field(s, seed + 2, 3, amp);
    TimeField H(s, samples);
    for (int k = 0; k < samples; ++k) {
        double t = double(k) / (samples - 1);
        double w1 = std::sin(2 * M_PI * t + p1), w2 = std::cos(2 * M_PI * t + p2);
        for (int i = 0; i < s.num_cells(); ++i)
            H.fields[k][i] = w1 * base[i] + 0.5 * w2 * base2[i];
    }
    return H;
}

} // namespace hamflex::testing

#endif
