// Benchmark: OpenMP kernels against the serial reference implementations
// (flow integration and pullback), with a correctness cross-check.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "hamflex/field.hpp"
#include "hamflex/flow.hpp"

using namespace hamflex;
using clk = std::chrono::steady_clock;

static double ms_since(clk::time_point t0) {
    return std::chrono::duration<double, std::milli>(clk::now() - t0).count();
}

int main() {
    GridSpec s(-2, 2, -2, 2, 256, 256);
    // Rotation-style generator: H = (x^2 + y^2)/2 tapered to zero at the rim.
    TimeField H(s, 2);
    for (GridField& f : H.fields) {
        for (int i = 0; i < s.num_cells(); ++i) {
            double x = s.cell_x(i), y = s.cell_y(i);
            double r2 = x * x + y * y;
            double taper = std::max(0.0, 1.0 - r2 / 3.0);
            f[i] = 0.5 * r2 * taper * taper;
        }
    }
    GridField probe(s);
    for (int i = 0; i < s.num_cells(); ++i) {
        double x = s.cell_x(i), y = s.cell_y(i);
        probe[i] = std::exp(-4 * ((x - 0.5) * (x - 0.5) + y * y));
    }

    const int steps = 200;
    auto t0 = clk::now();
    FlowMap par = integrate(H, steps);
    double t_par = ms_since(t0);

    t0 = clk::now();
    FlowMap ser = serial::integrate(H, steps);
    double t_ser = ms_since(t0);

    double dist = map_distance(par, ser);

    t0 = clk::now();
    GridField pb_par = pullback(probe, par);
    double t_pb_par = ms_since(t0);

    t0 = clk::now();
    GridField pb_ser = serial::pullback(probe, ser);
    double t_pb_ser = ms_since(t0);

    double pb_diff = 0;
    for (int i = 0; i < s.num_cells(); ++i)
        pb_diff = std::max(pb_diff, std::fabs(pb_par[i] - pb_ser[i]));

    std::printf("kernel          serial_ms   openmp_ms   speedup\n");
    std::printf("integrate       %9.1f   %9.1f   %6.2fx\n", t_ser, t_par,
                t_ser / t_par);
    std::printf("pullback        %9.1f   %9.1f   %6.2fx\n", t_pb_ser, t_pb_par,
                t_pb_ser / t_pb_par);
    std::printf("max map deviation (serial vs openmp): %.3g\n", dist);
    std::printf("max pullback deviation:               %.3g\n", pb_diff);
    return (dist < 1e-12 && pb_diff < 1e-12) ? 0 : 1;
}
