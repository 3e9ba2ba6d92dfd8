#include "hamflex/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hamflex {

GridSpec::GridSpec(double x0, double x1, double y0, double y1, int nx_, int ny_)
    : x_min(x0), x_max(x1), y_min(y0), y_max(y1), nx(nx_), ny(ny_) {
    if (nx < 2 || ny < 2)
        throw SpecMismatch("grid needs nx,ny >= 2");
    if (!(x_max > x_min) || !(y_max > y_min))
        throw SpecMismatch("grid box is degenerate");
}

int GridSpec::locate(double x, double y) const {
    if (x < x_min || x >= x_max || y < y_min || y >= y_max) return -1;
    int ix = static_cast<int>((x - x_min) / dx());
    int iy = static_cast<int>((y - y_min) / dy());
    ix = std::clamp(ix, 0, nx - 1);
    iy = std::clamp(iy, 0, ny - 1);
    return index(ix, iy);
}

bool GridSpec::operator==(const GridSpec& o) const {
    return x_min == o.x_min && x_max == o.x_max && y_min == o.y_min &&
           y_max == o.y_max && nx == o.nx && ny == o.ny;
}

int CellSet::count() const {
    int c = 0;
    for (auto m : mask) c += (m != 0);
    return c;
}

std::vector<int> CellSet::cells() const {
    std::vector<int> out;
    for (int i = 0; i < (int)mask.size(); ++i)
        if (mask[i]) out.push_back(i);
    return out;
}

CellSet CellSet::dilate(int rings) const {
    CellSet out = *this;
    for (int r = 0; r < rings; ++r) {
        CellSet next = out;
        for (int iy = 0; iy < spec.ny; ++iy)
            for (int ix = 0; ix < spec.nx; ++ix) {
                if (!out.mask[spec.index(ix, iy)]) continue;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int jx = ix + dx, jy = iy + dy;
                        if (jx >= 0 && jx < spec.nx && jy >= 0 && jy < spec.ny)
                            next.mask[spec.index(jx, jy)] = 1;
                    }
            }
        out = std::move(next);
    }
    return out;
}

CellSet CellSet::complement() const {
    CellSet out = *this;
    for (auto& m : out.mask) m = m ? 0 : 1;
    return out;
}

bool CellSet::disjoint_from(const CellSet& other) const {
    if (spec != other.spec) throw SpecMismatch("CellSet spec mismatch");
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i] && other.mask[i]) return false;
    return true;
}

CellSet CellSet::intersect(const CellSet& other) const {
    if (spec != other.spec) throw SpecMismatch("CellSet spec mismatch");
    CellSet out(spec);
    for (size_t i = 0; i < mask.size(); ++i) out.mask[i] = mask[i] && other.mask[i];
    return out;
}

CellSet CellSet::unite(const CellSet& other) const {
    if (spec != other.spec) throw SpecMismatch("CellSet spec mismatch");
    CellSet out(spec);
    for (size_t i = 0; i < mask.size(); ++i) out.mask[i] = mask[i] || other.mask[i];
    return out;
}

CellSet CellSet::from_rect(const GridSpec& s, double x0, double x1, double y0,
                           double y1) {
    CellSet out(s);
    for (int i = 0; i < s.num_cells(); ++i) {
        double x = s.cell_x(i), y = s.cell_y(i);
        if (x >= x0 && x <= x1 && y >= y0 && y <= y1) out.mask[i] = 1;
    }
    return out;
}

CellSet CellSet::from_disk(const GridSpec& s, double cx, double cy, double r) {
    CellSet out(s);
    for (int i = 0; i < s.num_cells(); ++i) {
        double x = s.cell_x(i) - cx, y = s.cell_y(i) - cy;
        if (x * x + y * y <= r * r) out.mask[i] = 1;
    }
    return out;
}

CellSet CellSet::from_cells(const GridSpec& s, const std::vector<int>& idx) {
    CellSet out(s);
    for (int i : idx) {
        if (i < 0 || i >= s.num_cells())
            throw SpecMismatch("cell index out of range");
        out.mask[i] = 1;
    }
    return out;
}

double GridField::effective_support_tol() const {
    if (support_tol >= 0) return support_tol;
    return 1e-9 * sup_norm(*this);
}

bool GridField::boundary_clear() const {
    for (int ix = 0; ix < spec.nx; ++ix)
        if (values[spec.index(ix, 0)] != 0.0 ||
            values[spec.index(ix, spec.ny - 1)] != 0.0)
            return false;
    for (int iy = 0; iy < spec.ny; ++iy)
        if (values[spec.index(0, iy)] != 0.0 ||
            values[spec.index(spec.nx - 1, iy)] != 0.0)
            return false;
    return true;
}

double GridField::sample(double x, double y) const {
    // Bilinear on cell centers; zero extension outside.
    double fx = (x - spec.x_min) / spec.dx() - 0.5;
    double fy = (y - spec.y_min) / spec.dy() - 0.5;
    int ix = static_cast<int>(std::floor(fx));
    int iy = static_cast<int>(std::floor(fy));
    double ax = fx - ix, ay = fy - iy;
    auto val = [&](int jx, int jy) -> double {
        if (jx < 0 || jx >= spec.nx || jy < 0 || jy >= spec.ny) return 0.0;
        return values[spec.index(jx, jy)];
    };
    return (1 - ax) * (1 - ay) * val(ix, iy) + ax * (1 - ay) * val(ix + 1, iy) +
           (1 - ax) * ay * val(ix, iy + 1) + ax * ay * val(ix + 1, iy + 1);
}

double sup_norm(const GridField& f) {
    double m = 0;
#pragma omp parallel for reduction(max : m)
    for (int i = 0; i < (int)f.values.size(); ++i)
        m = std::max(m, std::fabs(f.values[i]));
    return m;
}

double l1_norm(const GridField& f) {
    double s = 0;
#pragma omp parallel for reduction(+ : s)
    for (int i = 0; i < (int)f.values.size(); ++i) s += std::fabs(f.values[i]);
    return s * f.spec.cell_area();
}

double lp_norm(const GridField& f, double p) {
    double s = 0;
#pragma omp parallel for reduction(+ : s)
    for (int i = 0; i < (int)f.values.size(); ++i)
        s += std::pow(std::fabs(f.values[i]), p);
    return std::pow(s * f.spec.cell_area(), 1.0 / p);
}

double mean(const GridField& f) {
    double s = 0;
#pragma omp parallel for reduction(+ : s)
    for (int i = 0; i < (int)f.values.size(); ++i) s += f.values[i];
    return s * f.spec.cell_area();
}

CellSet support_cells(const GridField& f) {
    CellSet out(f.spec);
    double tol = f.effective_support_tol();
    for (int i = 0; i < (int)f.values.size(); ++i)
        if (std::fabs(f.values[i]) > tol) out.mask[i] = 1;
    return out;
}

double support_volume(const GridField& f) { return support_cells(f).volume(); }

GridField lin_comb(const std::vector<std::pair<double, const GridField*>>& terms) {
    if (terms.empty()) throw SpecMismatch("lin_comb of zero terms");
    const GridSpec& s = terms.front().second->spec;
    for (auto& [c, f] : terms)
        if (f->spec != s) throw SpecMismatch("lin_comb spec mismatch");
    GridField out(s);
    for (auto& [c, f] : terms)
        for (int i = 0; i < s.num_cells(); ++i) out.values[i] += c * f->values[i];
    return out;
}

GridField restrict_to(const GridField& f, const CellSet& cells) {
    if (f.spec != cells.spec) throw SpecMismatch("restrict_to spec mismatch");
    GridField out(f.spec);
    out.support_tol = f.support_tol;
    for (int i = 0; i < f.spec.num_cells(); ++i)
        if (cells.mask[i]) out.values[i] = f.values[i];
    return out;
}

double lipschitz_estimate(const GridField& f) {
    const GridSpec& s = f.spec;
    double m = 0;
    for (int iy = 0; iy < s.ny; ++iy)
        for (int ix = 0; ix < s.nx; ++ix) {
            double v = f.values[s.index(ix, iy)];
            if (ix + 1 < s.nx)
                m = std::max(m, std::fabs(f.values[s.index(ix + 1, iy)] - v) / s.dx());
            if (iy + 1 < s.ny)
                m = std::max(m, std::fabs(f.values[s.index(ix, iy + 1)] - v) / s.dy());
        }
    return m;
}

double gradient_sup(const GridField& f) {
    const GridSpec& s = f.spec;
    double m = 0;
#pragma omp parallel for reduction(max : m)
    for (int iy = 0; iy < s.ny; ++iy)
        for (int ix = 0; ix < s.nx; ++ix) {
            int xp = std::min(ix + 1, s.nx - 1), xm = std::max(ix - 1, 0);
            int yp = std::min(iy + 1, s.ny - 1), ym = std::max(iy - 1, 0);
            double gx = (f.values[s.index(xp, iy)] - f.values[s.index(xm, iy)]) /
                        ((xp - xm) * s.dx());
            double gy = (f.values[s.index(ix, yp)] - f.values[s.index(ix, ym)]) /
                        ((yp - ym) * s.dy());
            m = std::max(m, std::hypot(gx, gy));
        }
    return m;
}

TimeField::TimeField(const GridSpec& s, int samples) {
    if (samples < 2) throw SpecMismatch("TimeField needs >= 2 time samples");
    fields.assign(samples, GridField(s));
}

void TimeField::validate() const {
    if (fields.size() < 2) throw SpecMismatch("TimeField needs >= 2 time samples");
    for (auto& f : fields)
        if (f.spec != fields.front().spec)
            throw SpecMismatch("TimeField fields must share one spec");
}

GridField TimeField::at_time(double t) const {
    t = std::clamp(t, 0.0, 1.0);
    double pos = t * (num_samples() - 1);
    int i = std::min(static_cast<int>(pos), num_samples() - 2);
    double a = pos - i;
    GridField out(spec());
    for (int k = 0; k < out.spec.num_cells(); ++k)
        out.values[k] = (1 - a) * fields[i].values[k] + a * fields[i + 1].values[k];
    return out;
}

double l1inf_norm(const TimeField& H) {
    double total = 0;
    for (int i = 0; i < H.num_samples(); ++i) {
        double w = (i == 0 || i == H.num_samples() - 1) ? 0.5 : 1.0;
        total += w * sup_norm(H.fields[i]);
    }
    return total * H.dt();
}

double l11_norm(const TimeField& H) {
    double total = 0;
    for (int i = 0; i < H.num_samples(); ++i) {
        double w = (i == 0 || i == H.num_samples() - 1) ? 0.5 : 1.0;
        total += w * l1_norm(H.fields[i]);
    }
    return total * H.dt();
}

namespace {
void print_value(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}
} // namespace

void write_gf1(std::ostream& os, const GridField& f) {
    os << "GF1 " << f.spec.nx << ' ' << f.spec.ny << ' ';
    print_value(os, f.spec.x_min); os << ' ';
    print_value(os, f.spec.x_max); os << ' ';
    print_value(os, f.spec.y_min); os << ' ';
    print_value(os, f.spec.y_max); os << ' ';
    print_value(os, f.support_tol); os << '\n';
    for (int iy = 0; iy < f.spec.ny; ++iy) {
        for (int ix = 0; ix < f.spec.nx; ++ix) {
            if (ix) os << ' ';
            print_value(os, f.values[f.spec.index(ix, iy)]);
        }
        os << '\n';
    }
}

GridField read_gf1(std::istream& is) {
    std::string magic;
    is >> magic;
    if (magic != "GF1") throw IoError("expected GF1 header");
    int nx, ny;
    double x0, x1, y0, y1, tol;
    if (!(is >> nx >> ny >> x0 >> x1 >> y0 >> y1 >> tol))
        throw IoError("bad GF1 header");
    GridField f(GridSpec(x0, x1, y0, y1, nx, ny));
    f.support_tol = tol;
    for (int i = 0; i < f.spec.num_cells(); ++i)
        if (!(is >> f.values[i])) throw IoError("truncated GF1 body");
    return f;
}

void write_gf1_file(const std::string& path, const GridField& f) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_gf1(os, f);
}

GridField read_gf1_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    return read_gf1(is);
}

void write_tf1(std::ostream& os, const TimeField& H) {
    H.validate();
    os << "TF1 " << H.num_samples() << '\n';
    for (auto& f : H.fields) write_gf1(os, f);
}

TimeField read_tf1(std::istream& is) {
    std::string magic;
    int samples;
    if (!(is >> magic >> samples) || magic != "TF1")
        throw IoError("expected TF1 header");
    TimeField H;
    for (int i = 0; i < samples; ++i) H.fields.push_back(read_gf1(is));
    H.validate();
    return H;
}

void write_tf1_file(const std::string& path, const TimeField& H) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_tf1(os, H);
}

TimeField read_tf1_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    return read_tf1(is);
}

} // namespace hamflex
