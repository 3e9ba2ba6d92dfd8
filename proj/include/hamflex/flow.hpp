#ifndef HAMFLEX_FLOW_HPP
#define HAMFLEX_FLOW_HPP

#include <optional>
#include <string>
#include <vector>

#include "hamflex/cube_grid.hpp"
#include "hamflex/field.hpp"
#include "hamflex/transport.hpp"

namespace hamflex {

/// Discretized diffeomorphism: forward and backward displacement fields on
/// grid nodes (cell centers), zero displacement meaning identity. Immutable
/// after construction.
struct FlowMap {
    GridSpec spec;
    std::vector<double> fwd_dx, fwd_dy;   // forward displacement per node
    std::vector<double> bwd_dx, bwd_dy;   // backward displacement per node
    double area_distortion = 0;           // max |det J - 1| of the forward map

    FlowMap() = default;
    static FlowMap identity(const GridSpec& s);

    /// Map an arbitrary point (bilinear interpolation of the displacement).
    void forward_point(double x, double y, double& ox, double& oy) const;
    void backward_point(double x, double y, double& ox, double& oy) const;

    FlowMap inverse() const;
    /// Max node-wise distance between forward(p) and backward(forward(p))
    /// and p; a self-consistency measure.
    double roundtrip_error() const;
};

/// b after a: (compose(a,b))(x) = b(a(x)).
FlowMap compose(const FlowMap& a, const FlowMap& b);
/// Composition of a list, applied left to right: maps[0] first.
FlowMap compose_all(const std::vector<const FlowMap*>& maps);
/// Product in group notation: product({A,B,C}) = A o B o C (C applied first).
FlowMap group_product(const std::vector<const FlowMap*>& maps);
/// Max over nodes of |a.forward(p) - b.forward(p)|.
double map_distance(const FlowMap& a, const FlowMap& b);

/// Time-1 map of the Hamiltonian flow of H: node trajectories integrated
/// with classical RK4; velocity (dH/dy, -dH/dx) by centered differences.
/// Throws CFLViolation when the per-step displacement exceeds one cell.
FlowMap integrate(const TimeField& H, int steps);
/// Autonomous convenience overload (flow of H for unit time).
FlowMap integrate(const GridField& H, int steps);
/// Flow of H restricted to [t0,t1] (0 <= t0 < t1 <= 1): forward map from
/// time t0 to t1, backward the reverse.
FlowMap integrate_interval(const TimeField& H, double t0, double t1, int steps);
/// Flow maps phi^{t_k} at every sample time of H (element 0 is the
/// identity), built incrementally from one velocity field.
std::vector<FlowMap> integrate_partials(const TimeField& H,
                                        int steps_per_sample);

namespace serial {
/// Reference single-threaded implementations, kept for testing the
/// OpenMP kernels against.
FlowMap integrate(const TimeField& H, int steps);
GridField pullback(const GridField& f, const FlowMap& phi);
} // namespace serial

/// f o phi^{-1}, bilinear interpolation.
GridField pullback(const GridField& f, const FlowMap& phi);

struct TranslationResult {
    FlowMap flow;
    double hofer_cost = 0;       // sum over segments of ||H_seg||_inf
    TimeField generator;         // one autonomous field per segment
    std::vector<double> segment_costs;
};

/// Hamiltonian translation of a cube along a waypoint polyline: per segment
/// an autonomous generator chi * (dx*(y-yc) - dy*(x-xc)) with a plateau
/// covering the swept cube plus `clearance` cells, integrated and composed.
TranslationResult translate_cube(const CubeRoute& route, const GridSpec& spec,
                                 int clearance, int steps_per_segment = 64);

/// Input data for the conjugation-identity check: the cube maps f[0..N],
/// the even/odd swap map Psi and Psi', the chart translations phi[0..N]
/// (phi[0] = identity), and the generator costs of Psi, Psi'.
struct SikoravData {
    std::vector<FlowMap> f;    // time-1 maps of the profile Hamiltonians
    std::vector<FlowMap> phi;  // phi[i] maps Q_0 onto Q_i
    FlowMap psi, psi_prime;
    double psi_cost = 0, psi_prime_cost = 0;
};

struct ConjugationReport {
    double residual_1 = 0;  // Phi^-1 PhiTilde factorization
    double residual_2 = 0;  // PhiTilde^-1 PhiHat factorization
    double residual_3 = 0;  // Phi'^-1 PhiHat factorization
    double cost_ledger = 0; // 2|Psi| + 2|Psi| + 2|Psi'|
    double delta = 0;       // max(psi_cost, psi_prime_cost)
    bool ledger_ok = false; // cost_ledger <= 6 delta
};

/// Verifies the three telescoping factorizations numerically as map
/// identities and reports the Hofer-cost ledger. Throws IdentityMismatch
/// when a residual exceeds `tolerance`.
ConjugationReport conjugation_identities(const SikoravData& data,
                                         double tolerance);

/// Pluggable local-solver contract: given a zero-mean f on a window, return
/// signed flows realizing f as a sum of signed pullbacks of u.
struct OracleTerm {
    double sign = 1;  // +1 or -1
    FlowMap flow;
};

class LocalSolverOracle {
public:
    virtual ~LocalSolverOracle() = default;
    /// Returns the terms, or nullopt when the instance is outside the
    /// oracle's supported class.
    virtual std::optional<std::vector<OracleTerm>> solve(
        const GridField& f, const GridField& u, const Cube& window) = 0;
};

/// Default stub: holds explicit candidate terms and accepts an instance only
/// when their signed pullback sum reproduces f within `tolerance`.
class CandidateListOracle : public LocalSolverOracle {
public:
    CandidateListOracle(std::vector<OracleTerm> terms, double tolerance)
        : terms_(std::move(terms)), tolerance_(tolerance) {}
    std::optional<std::vector<OracleTerm>> solve(const GridField& f,
                                                 const GridField& u,
                                                 const Cube& window) override;

private:
    std::vector<OracleTerm> terms_;
    double tolerance_;
};

// FM1 file format: header + forward and backward displacement arrays.
void write_fm1_file(const std::string& path, const FlowMap& m);
FlowMap read_fm1_file(const std::string& path);

} // namespace hamflex

#endif
