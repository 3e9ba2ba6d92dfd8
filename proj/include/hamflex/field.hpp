#ifndef HAMFLEX_FIELD_HPP
#define HAMFLEX_FIELD_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hamflex/errors.hpp"

namespace hamflex {

/// Uniform cell-centered grid over a planar box [x_min,x_max] x [y_min,y_max].
/// Cell (ix,iy) has center (x_min + (ix+1/2)dx, y_min + (iy+1/2)dy) and
/// index iy*nx + ix (row-major).
struct GridSpec {
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    int nx = 2, ny = 2;

    GridSpec() = default;
    GridSpec(double x0, double x1, double y0, double y1, int nx_, int ny_);

    double dx() const { return (x_max - x_min) / nx; }
    double dy() const { return (y_max - y_min) / ny; }
    double cell_area() const { return dx() * dy(); }
    int num_cells() const { return nx * ny; }

    int index(int ix, int iy) const { return iy * nx + ix; }
    int cell_ix(int idx) const { return idx % nx; }
    int cell_iy(int idx) const { return idx / nx; }
    double cell_x(int idx) const { return x_min + (cell_ix(idx) + 0.5) * dx(); }
    double cell_y(int idx) const { return y_min + (cell_iy(idx) + 0.5) * dy(); }

    /// Cell containing point (x,y), or -1 if outside the box.
    int locate(double x, double y) const;

    bool operator==(const GridSpec& o) const;
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

/// Subset of grid cells, stored as a mask over one GridSpec.
struct CellSet {
    GridSpec spec;
    std::vector<std::uint8_t> mask;

    CellSet() = default;
    explicit CellSet(const GridSpec& s) : spec(s), mask(s.num_cells(), 0) {}

    bool contains(int idx) const { return idx >= 0 && mask[idx] != 0; }
    void insert(int idx) { mask[idx] = 1; }
    void erase(int idx) { mask[idx] = 0; }
    int count() const;
    double volume() const { return count() * spec.cell_area(); }
    bool empty() const { return count() == 0; }
    std::vector<int> cells() const;

    CellSet dilate(int rings) const;
    CellSet complement() const;
    bool disjoint_from(const CellSet& other) const;
    CellSet intersect(const CellSet& other) const;
    CellSet unite(const CellSet& other) const;

    static CellSet from_rect(const GridSpec& s, double x0, double x1,
                             double y0, double y1);
    static CellSet from_disk(const GridSpec& s, double cx, double cy, double r);
    static CellSet from_cells(const GridSpec& s, const std::vector<int>& idx);
};

/// Scalar field sampled at cell centers. Immutable by convention: operations
/// return new fields.
struct GridField {
    GridSpec spec;
    std::vector<double> values;
    /// Threshold for support extraction; negative means "auto"
    /// (1e-9 * sup norm).
    double support_tol = -1.0;

    GridField() = default;
    explicit GridField(const GridSpec& s, double fill = 0.0)
        : spec(s), values(s.num_cells(), fill) {}

    double& operator[](int idx) { return values[idx]; }
    double operator[](int idx) const { return values[idx]; }

    double effective_support_tol() const;
    /// True if the boundary ring of cells is identically zero.
    bool boundary_clear() const;

    /// Bilinear interpolation at an arbitrary point; fields are treated as
    /// zero outside the box.
    double sample(double x, double y) const;
};

double sup_norm(const GridField& f);
double l1_norm(const GridField& f);
double lp_norm(const GridField& f, double p);
double mean(const GridField& f);
CellSet support_cells(const GridField& f);
double support_volume(const GridField& f);

/// Pointwise linear combination sum_i coef_i * f_i. All fields must share
/// one spec. Terms are accumulated in argument order.
GridField lin_comb(const std::vector<std::pair<double, const GridField*>>& terms);

GridField restrict_to(const GridField& f, const CellSet& cells);

/// Max |f(c) - f(c')| over edge-adjacent cell pairs divided by cell pitch;
/// a grid Lipschitz estimate used in tolerance models.
double lipschitz_estimate(const GridField& f);

/// Max |grad f| over cells by centered differences.
double gradient_sup(const GridField& f);

/// Time-dependent Hamiltonian: num_samples() fields sharing one spec on a
/// uniform partition of [0,1] (sample i at t = i/(num_samples()-1)).
struct TimeField {
    std::vector<GridField> fields;

    TimeField() = default;
    TimeField(const GridSpec& s, int samples);

    int num_samples() const { return static_cast<int>(fields.size()); }
    double t_of(int i) const { return double(i) / (num_samples() - 1); }
    double dt() const { return 1.0 / (num_samples() - 1); }
    const GridSpec& spec() const { return fields.front().spec; }

    void validate() const;

    /// Linear interpolation in time.
    GridField at_time(double t) const;
};

/// int_0^1 ||H(t,.)||_inf dt  (trapezoid rule on the time grid).
double l1inf_norm(const TimeField& H);
/// int_0^1 ||H(t,.)||_L1 dt.
double l11_norm(const TimeField& H);

// GF1 / TF1 text formats. Values are printed with 17 significant digits and
// round-trip bit-exactly.
void write_gf1(std::ostream& os, const GridField& f);
GridField read_gf1(std::istream& is);
void write_gf1_file(const std::string& path, const GridField& f);
GridField read_gf1_file(const std::string& path);

void write_tf1(std::ostream& os, const TimeField& H);
TimeField read_tf1(std::istream& is);
void write_tf1_file(const std::string& path, const TimeField& H);
TimeField read_tf1_file(const std::string& path);

} // namespace hamflex

#endif
