#include "hamflex/time_avg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hamflex {

namespace {

double trapezoid(const std::vector<double>& v, double dt) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) s += 0.5 * (v[i] + v[i + 1]);
    return s * dt;
}

} // namespace

double TimeProfile::integral() const {
    double dt = (t1() - t0()) / (static_cast<int>(values.size()) - 1);
    return trapezoid(values, dt);
}

double TimeProfile::deviation_integral() const {
    std::vector<double> dev(values.size());
    for (std::size_t k = 0; k < values.size(); ++k)
        dev[k] = std::fabs(1.0 - values[k] / N);
    double dt = (t1() - t0()) / (static_cast<int>(values.size()) - 1);
    return trapezoid(dev, dt);
}

TimeProfile bump_profile(int N, int i, int samples) {
    if (N < 1 || i < 1 || i > N)
        throw SpecMismatch("bump_profile: need 1 <= i <= N");
    if (samples < 32)
        throw CannotMeetTolerance("bump_profile: need at least 32 samples per interval");

    // Ramp widths are snapped to whole sample steps so the piecewise-linear
    // profile is represented exactly by its samples; pick the width with the
    // smallest sampled deviation integral (a one-step ramp gives 2/(M*N)).
    TimeProfile p;
    p.N = N;
    p.interval = i;
    double w = 1.0 / N;
    double ds = w / (samples - 1);
    double best_dev = -1;
    for (int m = 1; m <= (samples - 1) / 2; ++m) {
        double r = m * ds;
        TimeProfile cand;
        cand.N = N;
        cand.interval = i;
        cand.values.resize(samples);
        for (int k = 0; k < samples; ++k) {
            double s = w * k / (samples - 1);
            double v = std::min({1.0, s / r, (w - s) / r});
            cand.values[k] = std::max(0.0, v) / (w - r);
        }
        // Rescale so the sampled trapezoid integral is exactly 1.
        double integ = cand.integral();
        for (double& v : cand.values) v /= integ;
        double dev = cand.deviation_integral();
        if (best_dev < 0 || dev < best_dev) {
            best_dev = dev;
            p = std::move(cand);
        }
    }

    if (!(p.deviation_integral() < 1.0 / (double(N) * N)))
        throw CannotMeetTolerance("bump_profile: sampled deviation integral misses 1/N^2");
    return p;
}

std::pair<TimeField, NormalizeWitness> normalize_mean(const TimeField& H,
                                                      const CellSet& chi_region) {
    H.validate();
    const GridSpec& s = H.spec();
    if (chi_region.spec != s)
        throw SpecMismatch("normalize_mean: chi_region grid differs from H");

    CellSet union_supp(s);
    for (const GridField& f : H.fields)
        union_supp = union_supp.unite(support_cells(f));
    if (!union_supp.disjoint_from(chi_region))
        throw RegionOverlap("normalize_mean: chi_region meets the support of H");

    double vol_v = union_supp.volume();
    double vol_r = chi_region.volume();
    if (!(vol_r > vol_v))
        throw VolumeTooSmall("normalize_mean: Vol(chi_region) = " +
                             std::to_string(vol_r) + " must exceed Vol(supp H) = " +
                             std::to_string(vol_v));

    NormalizeWitness w;
    w.a.resize(H.num_samples());
    for (int k = 0; k < H.num_samples(); ++k)
        w.a[k] = mean(H.fields[k]);
    if (std::fabs(trapezoid(w.a, H.dt())) > 1e-8)
        throw HypothesisViolated("normalize_mean: H is not zero-mean in time");

    w.chi = GridField(s);
    double height = 1.0 / vol_r;  // unit integral, below 1/Vol(supp H)
    for (int idx : chi_region.cells()) w.chi[idx] = height;

    TimeField G = H;
    for (int k = 0; k < G.num_samples(); ++k) {
        if (w.a[k] == 0.0) continue;
        for (int idx : chi_region.cells())
            G.fields[k][idx] -= w.a[k] * height;
    }
    for (const GridField& f : G.fields) {
        if (std::fabs(mean(f)) > 1e-8)
            throw InequalityViolated("normalize_mean: slice mean failed to cancel");
    }
    double nh = l1inf_norm(H), ng = l1inf_norm(G);
    if (std::fabs(nh - ng) > 1e-10 * std::max(1.0, nh))
        throw InequalityViolated("normalize_mean: sup norm not preserved");
    return {std::move(G), std::move(w)};
}

DiscretizationCertificate discretize(const TimeField& G, int N) {
    G.validate();
    if (N < 1) throw SpecMismatch("discretize: N must be positive");
    const GridSpec& s = G.spec();
    int T = G.num_samples();
    if ((T - 1) % N != 0)
        throw TimeGridTooCoarse("discretize: time grid does not refine the " +
                                std::to_string(N) + " intervals");
    int M = (T - 1) / N;
    if (M < 32)
        throw TimeGridTooCoarse("discretize: need at least 32 time steps per interval");

    for (const GridField& f : G.fields) {
        if (std::fabs(mean(f)) >
            1e-8 * std::max(1.0, sup_norm(f)))
            throw HypothesisViolated("discretize: G has a nonzero-mean slice");
    }

    DiscretizationCertificate cert;
    cert.N = N;
    double dt = G.dt();

    for (int i = 0; i < N; ++i) {
        GridField gi(s);
        for (int k = i * M; k < (i + 1) * M; ++k) {
            const GridField& a = G.fields[k];
            const GridField& b = G.fields[k + 1];
            for (int idx = 0; idx < s.num_cells(); ++idx)
                gi[idx] += 0.5 * (a[idx] + b[idx]) * dt;
        }
        cert.g.push_back(std::move(gi));
        cert.chi.push_back(bump_profile(N, i + 1, M + 1));
    }

    cert.g_tilde = TimeField(s, T);
    for (int k = 0; k < T; ++k) {
        int i = std::min(k / M, N - 1);
        double c = cert.chi[i].values[k - i * M];
        GridField& out = cert.g_tilde.fields[k];
        const GridField& gi = cert.g[i];
        for (int idx = 0; idx < s.num_cells(); ++idx) out[idx] = c * gi[idx];
    }

    // Error generator along the g_tilde flow:
    // K(t,x) = G(t, phi^t(x)) - Gtilde(t, phi^t(x)).
    std::vector<FlowMap> phis = integrate_partials(cert.g_tilde, 2);
    cert.K = TimeField(s, T);
    for (int k = 0; k < T; ++k) {
        const FlowMap& phi = phis[k];
        GridField& out = cert.K.fields[k];
#pragma omp parallel for
        for (int idx = 0; idx < s.num_cells(); ++idx) {
            double px, py;
            phi.forward_point(s.cell_x(idx), s.cell_y(idx), px, py);
            out[idx] = G.fields[k].sample(px, py) -
                       cert.g_tilde.fields[k].sample(px, py);
        }
    }

    double c_time = 0;
    for (int k = 0; k < T; ++k) {
        int kl = std::max(k - 1, 0), kr = std::min(k + 1, T - 1);
        double h = (kr - kl) * dt;
        const GridField& a = G.fields[kl];
        const GridField& b = G.fields[kr];
        double worst = 0;
#pragma omp parallel for reduction(max : worst)
        for (int idx = 0; idx < s.num_cells(); ++idx)
            worst = std::max(worst, std::fabs(b[idx] - a[idx]) / h);
        c_time = std::max(c_time, worst);
    }
    cert.c_time = c_time;
    for (const GridField& f : G.fields) cert.c_sup = std::max(cert.c_sup, sup_norm(f));

    cert.k_l1inf = l1inf_norm(cert.K);
    cert.k_bound = (cert.c_time + cert.c_sup) / N;
    for (const GridField& gi : cert.g) cert.sum_g_sup += sup_norm(gi);
    cert.sum_bound = l1inf_norm(G) + cert.c_time / N;

    double slack = 10.0 / T;
    if (!(cert.k_l1inf <= cert.k_bound + slack))
        throw InequalityViolated("discretize: ||K|| = " + std::to_string(cert.k_l1inf) +
                                 " exceeds (C+C')/N = " + std::to_string(cert.k_bound) +
                                 " plus slack");
    if (!(cert.sum_g_sup <= cert.sum_bound + slack))
        throw InequalityViolated("discretize: sum ||g_i|| exceeds ||G|| + C/N plus slack");
    return cert;
}

} // namespace hamflex
