#ifndef COST_CONTINUUM_HPP_
#define COST_CONTINUUM_HPP_

#include "cost/core.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace cost {

// ---------------------------------------------------------------------------
// Bi-quadratic patches

/// Tensor-product quadratic Bezier patch; ctrl[3*j + i] is the control point
/// at column i (u direction) and row j (v direction).
struct Patch {
    std::array<Vec3, 9> ctrl;

    const Vec3& at(int i, int j) const { return ctrl[3 * j + i]; }
    Vec3& at(int i, int j) { return ctrl[3 * j + i]; }

    static std::array<double, 3> bern(double t) {
        return {(1 - t) * (1 - t), 2 * t * (1 - t), t * t};
    }
    static std::array<double, 3> dbern(double t) {
        return {2 * t - 2, 2 - 4 * t, 2 * t};
    }

    Vec3 point(double u, double v) const {
        auto bu = bern(u), bv = bern(v);
        Vec3 p = Vec3::Zero();
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) p += bu[i] * bv[j] * at(i, j);
        return p;
    }
    Vec3 du(double u, double v) const {
        auto bu = dbern(u);
        auto bv = bern(v);
        Vec3 p = Vec3::Zero();
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) p += bu[i] * bv[j] * at(i, j);
        return p;
    }
    Vec3 dv(double u, double v) const {
        auto bu = bern(u);
        auto bv = dbern(v);
        Vec3 p = Vec3::Zero();
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) p += bu[i] * bv[j] * at(i, j);
        return p;
    }
};

struct PatchSet {
    std::vector<Patch> patches;
};

/// Flips patch orientation by mirroring the u direction.
inline PatchSet reversed(const PatchSet& ps) {
    PatchSet out;
    for (const Patch& p : ps.patches) {
        Patch q;
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) q.at(i, j) = p.at(2 - i, j);
        out.patches.push_back(q);
    }
    return out;
}

namespace continuum_detail {

inline std::array<long long, 9> curve_key(const Vec3& a, const Vec3& b,
                                          const Vec3& c, double tol) {
    std::array<long long, 9> k;
    const Vec3* pts[3] = {&a, &b, &c};
    for (int p = 0; p < 3; ++p)
        for (int c2 = 0; c2 < 3; ++c2)
            k[3 * p + c2] = std::llround((*pts[p])(c2) / tol);
    return k;
}

/// The four boundary curves of a patch, oriented counterclockwise in (u,v).
inline std::array<std::array<Vec3, 3>, 4> boundary_curves(const Patch& p) {
    return {{{p.at(0, 0), p.at(1, 0), p.at(2, 0)},
             {p.at(2, 0), p.at(2, 1), p.at(2, 2)},
             {p.at(2, 2), p.at(1, 2), p.at(0, 2)},
             {p.at(0, 2), p.at(0, 1), p.at(0, 0)}}};
}

}  // namespace continuum_detail

/// A patch set is closed when every directed boundary curve cancels against
/// a reversed copy somewhere in the set; degenerate (point) curves cancel
/// themselves.
inline bool patchset_closed(const PatchSet& ps, double tol = 1e-9) {
    using continuum_detail::curve_key;
    std::map<std::array<long long, 9>, int> count;
    for (const Patch& p : ps.patches)
        for (const auto& c : continuum_detail::boundary_curves(p)) {
            auto fwd = curve_key(c[0], c[1], c[2], tol);
            auto rev = curve_key(c[2], c[1], c[0], tol);
            if (fwd == rev) continue;
            ++count[fwd];
            --count[rev];
        }
    for (const auto& [k, n] : count)
        if (n != 0) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Beam surfaces

namespace continuum_detail {

/// Orthonormal frame perpendicular to d, deterministic in d.
inline std::pair<Vec3, Vec3> frame(const Vec3& d) {
    int least = 0;
    for (int c = 1; c < 3; ++c)
        if (std::abs(d(c)) < std::abs(d(least))) least = c;
    Vec3 r = Vec3::Zero();
    r(least) = 1.0;
    Vec3 n1 = (r - r.dot(d) * d).normalized();
    Vec3 n2 = d.cross(n1);
    return {n1, n2};
}

/// Half-beam from p0 to p1: a tube whose cross section is the closed uniform
/// quadratic B-spline on a square of corners at distance t along n1, n2 (four
/// parabolic arcs, C1 at the seams), plus a cap closing the p0 end. Outward
/// orientation assumes (n1, n2, axis p1-p0) right-handed.
inline void half_beam(std::vector<Patch>& out, const Vec3& p0, const Vec3& p1,
                      const Vec3& n1, const Vec3& n2, double t, bool cap) {
    std::array<Vec3, 4> corner;
    for (int k = 0; k < 4; ++k) {
        double sx = (k == 0 || k == 3) ? 1.0 : -1.0;
        double sy = (k <= 1) ? 1.0 : -1.0;
        corner[k] = t * (sx * n1 + sy * n2);
    }
    std::array<Vec3, 3> spine = {p0, 0.5 * (p0 + p1), p1};
    for (int k = 0; k < 4; ++k) {
        Vec3 m0 = 0.5 * (corner[k] + corner[(k + 1) % 4]);
        Vec3 cc = corner[(k + 1) % 4];
        Vec3 m1 = 0.5 * (corner[(k + 1) % 4] + corner[(k + 2) % 4]);
        Patch side;
        for (int j = 0; j < 3; ++j) {
            side.at(0, j) = spine[j] + m0;
            side.at(1, j) = spine[j] + cc;
            side.at(2, j) = spine[j] + m1;
        }
        out.push_back(side);
        if (!cap) continue;
        Patch lid;  // v runs from the node out to the rim, normal along -axis
        for (int i = 0; i < 3; ++i) lid.at(i, 0) = p0;
        lid.at(0, 1) = p0 + 0.5 * m0;
        lid.at(1, 1) = p0 + 0.5 * cc;
        lid.at(2, 1) = p0 + 0.5 * m1;
        lid.at(0, 2) = p0 + m0;
        lid.at(1, 2) = p0 + cc;
        lid.at(2, 2) = p0 + m1;
        out.push_back(lid);
    }
}

}  // namespace continuum_detail

/// Beams along every edge: two half-beam tubes meeting at the edge midpoint
/// with shared rim control points, capped at both nodes. Bivariate structures
/// are expected at z = 0; per-edge thickness is the half-width of the square
/// profile polygon.
inline PatchSet beam_surface(const CostGraph& g, const Embedding& e,
                             const std::map<EdgeKey, double>& thickness) {
    std::map<VertexId, double> shortest;
    for (const auto& [ek, kind] : g.edges) {
        double len = e.edge_length(ek.first, ek.second);
        for (VertexId v : {ek.first, ek.second}) {
            auto it = shortest.find(v);
            if (it == shortest.end() || len < it->second) shortest[v] = len;
        }
    }
    PatchSet ps;
    for (const auto& [ek, kind] : g.edges) {
        auto it = thickness.find(ek);
        if (it == thickness.end())
            throw std::invalid_argument("beam_surface: missing thickness for edge (" +
                                        std::to_string(ek.first) + "," +
                                        std::to_string(ek.second) + ")");
        double t = it->second;
        if (t <= 0.0)
            throw std::invalid_argument("beam_surface: thickness must be positive");
        double limit = 0.5 * std::min(shortest.at(ek.first), shortest.at(ek.second));
        if (t >= limit)
            throw std::invalid_argument(
                "beam_surface: thickness " + std::to_string(t) +
                " reaches half the shortest incident edge");
        Vec3 pu = e.at(ek.first), pv = e.at(ek.second);
        Vec3 mid = 0.5 * (pu + pv);
        Vec3 d = (pv - pu).normalized();
        auto [n1, n2] = continuum_detail::frame(d);
        continuum_detail::half_beam(ps.patches, pu, mid, n1, n2, t, true);
        // the opposite half reuses n1 and negates n2 so both frames are
        // right-handed and the two rims coincide point for point
        continuum_detail::half_beam(ps.patches, pv, mid, n1, -n2, t, true);
    }
    return ps;
}

inline PatchSet beam_surface(const CostGraph& g, const Embedding& e,
                             double thickness) {
    std::map<EdgeKey, double> tmap;
    for (const auto& [ek, kind] : g.edges) tmap[ek] = thickness;
    return beam_surface(g, e, tmap);
}

/// Enclosed volume of a closed patch set by the divergence theorem,
/// V = (1/3) sum over patches of the flux of x. The integrand has bidegree
/// (5,5), so 4-point Gauss-Legendre per direction is exact.
inline double beam_volume(const PatchSet& ps) {
    if (!patchset_closed(ps))
        throw std::invalid_argument("beam_volume: patch set is not closed");
    static const double gx[4] = {
        0.5 - std::sqrt(525.0 + 70.0 * std::sqrt(30.0)) / 70.0,
        0.5 - std::sqrt(525.0 - 70.0 * std::sqrt(30.0)) / 70.0,
        0.5 + std::sqrt(525.0 - 70.0 * std::sqrt(30.0)) / 70.0,
        0.5 + std::sqrt(525.0 + 70.0 * std::sqrt(30.0)) / 70.0};
    static const double gw[4] = {(18.0 - std::sqrt(30.0)) / 72.0,
                                 (18.0 + std::sqrt(30.0)) / 72.0,
                                 (18.0 + std::sqrt(30.0)) / 72.0,
                                 (18.0 - std::sqrt(30.0)) / 72.0};
    double vol = 0.0;
    for (const Patch& p : ps.patches)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                Vec3 x = p.point(gx[a], gx[b]);
                Vec3 n = p.du(gx[a], gx[b]).cross(p.dv(gx[a], gx[b]));
                vol += gw[a] * gw[b] * x.dot(n);
            }
    return vol / 3.0;
}

// ---------------------------------------------------------------------------
// Box-spline fields

/// Coefficients live on integer lattice sites; the direction set is implied
/// by the dimension: three doubled directions for d = 2 (C2, total degree 4),
/// four doubled diagonal directions for d = 3 (total degree 5).
struct BoxSplineField {
    int dimension = 2;
    std::map<std::array<int, 3>, double> coeffs;
};

/// Samples of a refined coefficient grid; index (i,j,k) maps to the point
/// basis * (lo + index) / 2^level.
struct SampleGrid {
    int dimension = 2;
    int level = 0;
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> shape{0, 0, 1};
    Eigen::Matrix3d basis = Eigen::Matrix3d::Identity();
    std::vector<double> values;
    // trivariate box splines live on the same-parity (FCC-like) sublattice;
    // the other sites carry no samples
    bool diagonal_lattice = false;

    bool site_valid(int i, int j, int k = 0) const {
        if (!diagonal_lattice) return true;
        int a = lo[0] + i, b = lo[1] + j, c = lo[2] + k;
        return ((a ^ b) & 1) == 0 && ((a ^ c) & 1) == 0;
    }

    double value(int i, int j, int k = 0) const {
        return values[(static_cast<std::size_t>(k) * shape[1] + j) * shape[0] + i];
    }
    double& value(int i, int j, int k = 0) {
        return values[(static_cast<std::size_t>(k) * shape[1] + j) * shape[0] + i];
    }
    Vec3 position(int i, int j, int k = 0) const {
        Vec3 idx(lo[0] + i, lo[1] + j, lo[2] + k);
        return basis * idx / static_cast<double>(1 << level);
    }
};

namespace continuum_detail {

inline std::vector<std::array<int, 3>> boxspline_directions(int d) {
    if (d == 2) return {{1, 0, 0}, {0, 1, 0}, {-1, 1, 0}};
    if (d == 3) return {{1, 1, 1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, -1}};
    throw std::invalid_argument("box spline: dimension must be 2 or 3");
}

/// Subdivision mask 2^{d-n} prod (1 + z^xi)^2 over the direction set.
inline std::map<std::array<int, 3>, double> boxspline_mask(int d) {
    auto dirs = boxspline_directions(d);
    std::map<std::array<int, 3>, double> mask{{{0, 0, 0}, 1.0}};
    int n = 0;
    for (const auto& xi : dirs)
        for (int rep = 0; rep < 2; ++rep) {
            ++n;
            std::map<std::array<int, 3>, double> next;
            for (const auto& [off, w] : mask) {
                next[off] += w;
                next[{off[0] + xi[0], off[1] + xi[1], off[2] + xi[2]}] += w;
            }
            mask = std::move(next);
        }
    double scale = std::pow(2.0, d - n);
    for (auto& [off, w] : mask) w *= scale;
    return mask;
}

}  // namespace continuum_detail

inline BoxSplineField boxspline_field(int dimension,
                                      std::map<std::array<int, 3>, double> coeffs) {
    continuum_detail::boxspline_directions(dimension);  // validates dimension
    for (const auto& [site, c] : coeffs)
        if (!std::isfinite(c))
            throw std::invalid_argument("box spline: coefficient not finite");
    BoxSplineField f;
    f.dimension = dimension;
    f.coeffs = std::move(coeffs);
    return f;
}

/// Evaluates by `level` rounds of box-spline subdivision; the returned grid
/// holds the refined coefficients, which converge to the spline.
inline SampleGrid boxspline_eval(const BoxSplineField& f, int level) {
    if (level < 0) throw std::invalid_argument("box spline: level < 0");
    if (f.coeffs.empty()) throw std::invalid_argument("box spline: no coefficients");
    const int d = f.dimension;
    if (d == 3)
        for (const auto& [site, val] : f.coeffs)
            if (((site[0] ^ site[1]) & 1) != 0 || ((site[0] ^ site[2]) & 1) != 0)
                throw std::invalid_argument(
                    "box spline: trivariate sites must have equal parity "
                    "coordinates (node lattice)");
    SampleGrid grid;
    grid.dimension = d;
    grid.diagonal_lattice = (d == 3);
    grid.level = 0;
    if (d == 2) {
        grid.basis.col(0) = Vec3(1, 0, 0);
        grid.basis.col(1) = Vec3(0.5, std::sqrt(3.0) / 2.0, 0);
        grid.basis.col(2) = Vec3(0, 0, 1);
    }
    std::array<int, 3> hi;
    for (int c = 0; c < 3; ++c) {
        grid.lo[c] = std::numeric_limits<int>::max();
        hi[c] = std::numeric_limits<int>::min();
    }
    for (const auto& [site, val] : f.coeffs)
        for (int c = 0; c < 3; ++c) {
            grid.lo[c] = std::min(grid.lo[c], site[c]);
            hi[c] = std::max(hi[c], site[c]);
        }
    if (d == 2) grid.lo[2] = hi[2] = 0;
    for (int c = 0; c < 3; ++c) grid.shape[c] = hi[c] - grid.lo[c] + 1;
    grid.values.assign(static_cast<std::size_t>(grid.shape[0]) * grid.shape[1] *
                           grid.shape[2],
                       0.0);
    for (const auto& [site, val] : f.coeffs)
        grid.value(site[0] - grid.lo[0], site[1] - grid.lo[1],
                   site[2] - grid.lo[2]) = val;

    auto mask = continuum_detail::boxspline_mask(d);
    std::array<int, 3> mlo{0, 0, 0}, mhi{0, 0, 0};
    for (const auto& [off, w] : mask)
        for (int c = 0; c < 3; ++c) {
            mlo[c] = std::min(mlo[c], off[c]);
            mhi[c] = std::max(mhi[c], off[c]);
        }

    for (int round = 0; round < level; ++round) {
        SampleGrid fine;
        fine.dimension = d;
        fine.diagonal_lattice = grid.diagonal_lattice;
        fine.level = grid.level + 1;
        fine.basis = grid.basis;
        for (int c = 0; c < 3; ++c) {
            int lo = 2 * grid.lo[c] + mlo[c];
            int hi2 = 2 * (grid.lo[c] + grid.shape[c] - 1) + mhi[c];
            if (d == 2 && c == 2) {
                lo = 0;
                hi2 = 0;
            }
            fine.lo[c] = lo;
            fine.shape[c] = hi2 - lo + 1;
        }
        fine.values.assign(static_cast<std::size_t>(fine.shape[0]) *
                               fine.shape[1] * fine.shape[2],
                           0.0);
        for (int k = 0; k < grid.shape[2]; ++k)
            for (int j = 0; j < grid.shape[1]; ++j)
                for (int i = 0; i < grid.shape[0]; ++i) {
                    double c0 = grid.value(i, j, k);
                    if (c0 == 0.0) continue;
                    int bi = 2 * (grid.lo[0] + i), bj = 2 * (grid.lo[1] + j),
                        bk = 2 * (grid.lo[2] + k);
                    for (const auto& [off, w] : mask)
                        fine.value(bi + off[0] - fine.lo[0],
                                   bj + off[1] - fine.lo[1],
                                   bk + off[2] - fine.lo[2]) += w * c0;
                }
        grid = std::move(fine);
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Level sets

struct LevelSet {
    std::vector<std::vector<Vec3>> polylines;          // d = 2
    std::vector<std::array<Vec3, 3>> triangles;        // d = 3
};

namespace continuum_detail {

inline std::vector<std::vector<Vec3>> chain_segments(
    std::vector<std::pair<Vec3, Vec3>> segs, double tol = 1e-9) {
    auto key = [&](const Vec3& p) {
        return std::array<long long, 3>{std::llround(p.x() / tol),
                                        std::llround(p.y() / tol),
                                        std::llround(p.z() / tol)};
    };
    // endpoint -> (segment index, end index)
    std::map<std::array<long long, 3>, std::vector<std::pair<int, int>>> at;
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        at[key(segs[s].first)].push_back({s, 0});
        at[key(segs[s].second)].push_back({s, 1});
    }
    std::vector<bool> used(segs.size(), false);
    std::vector<std::vector<Vec3>> chains;
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        if (used[s]) continue;
        std::vector<Vec3> chain{segs[s].first, segs[s].second};
        used[s] = true;
        for (int side = 0; side < 2; ++side) {
            bool extended = true;
            while (extended) {
                extended = false;
                Vec3 tip = side == 0 ? chain.back() : chain.front();
                for (auto [t, end] : at[key(tip)]) {
                    if (used[t]) continue;
                    Vec3 next = end == 0 ? segs[t].second : segs[t].first;
                    used[t] = true;
                    if (side == 0)
                        chain.push_back(next);
                    else
                        chain.insert(chain.begin(), next);
                    extended = true;
                    break;
                }
            }
        }
        chains.push_back(std::move(chain));
    }
    return chains;
}

}  // namespace continuum_detail

/// Marching squares (d = 2) or marching tetrahedra (d = 3) with linear
/// interpolation on the sample grid.
inline LevelSet level_set(const SampleGrid& grid, double iso) {
    LevelSet out;
    auto lerp = [&](const Vec3& pa, double va, const Vec3& pb, double vb) {
        double t = (iso - va) / (vb - va);
        return pa + t * (pb - pa);
    };
    if (grid.dimension == 2) {
        std::vector<std::pair<Vec3, Vec3>> segs;
        for (int j = 0; j + 1 < grid.shape[1]; ++j)
            for (int i = 0; i + 1 < grid.shape[0]; ++i) {
                // corners counterclockwise from (i,j)
                double v[4] = {grid.value(i, j), grid.value(i + 1, j),
                               grid.value(i + 1, j + 1), grid.value(i, j + 1)};
                Vec3 p[4] = {grid.position(i, j), grid.position(i + 1, j),
                             grid.position(i + 1, j + 1), grid.position(i, j + 1)};
                int code = 0;
                for (int c = 0; c < 4; ++c)
                    if (v[c] > iso) code |= 1 << c;
                if (code == 0 || code == 15) continue;
                auto cut = [&](int a, int b) { return lerp(p[a], v[a], p[b], v[b]); };
                auto add = [&](Vec3 a, Vec3 b) { segs.push_back({a, b}); };
                switch (code) {
                    case 1: case 14: add(cut(0, 1), cut(0, 3)); break;
                    case 2: case 13: add(cut(0, 1), cut(1, 2)); break;
                    case 3: case 12: add(cut(1, 2), cut(0, 3)); break;
                    case 4: case 11: add(cut(1, 2), cut(2, 3)); break;
                    case 6: case 9:  add(cut(0, 1), cut(2, 3)); break;
                    case 7: case 8:  add(cut(2, 3), cut(0, 3)); break;
                    case 5: case 10: {
                        // ambiguous saddle, resolved by the cell average
                        double mid = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                        bool joined = (mid > iso) == (code == 5);
                        if (joined) {
                            add(cut(0, 1), cut(1, 2));
                            add(cut(2, 3), cut(0, 3));
                        } else {
                            add(cut(0, 1), cut(0, 3));
                            add(cut(1, 2), cut(2, 3));
                        }
                        break;
                    }
                }
            }
        out.polylines = continuum_detail::chain_segments(std::move(segs));
        return out;
    }
    // marching tetrahedra on a 6-tet cube split
    static const int tets[6][4] = {{0, 5, 1, 6}, {0, 1, 2, 6}, {0, 2, 3, 6},
                                   {0, 3, 7, 6}, {0, 7, 4, 6}, {0, 4, 5, 6}};
    for (int k = 0; k + 1 < grid.shape[2]; ++k)
        for (int j = 0; j + 1 < grid.shape[1]; ++j)
            for (int i = 0; i + 1 < grid.shape[0]; ++i) {
                Vec3 p[8];
                double v[8];
                for (int c = 0; c < 8; ++c) {
                    int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
                    p[c] = grid.position(i + di, j + dj, k + dk);
                    v[c] = grid.value(i + di, j + dj, k + dk);
                }
                for (const auto& tet : tets) {
                    int inside[4], nin = 0, outside[4], nout = 0;
                    for (int c = 0; c < 4; ++c) {
                        if (v[tet[c]] > iso)
                            inside[nin++] = tet[c];
                        else
                            outside[nout++] = tet[c];
                    }
                    auto cut = [&](int a, int b) {
                        return lerp(p[a], v[a], p[b], v[b]);
                    };
                    if (nin == 1) {
                        out.triangles.push_back({cut(inside[0], outside[0]),
                                                 cut(inside[0], outside[1]),
                                                 cut(inside[0], outside[2])});
                    } else if (nin == 3) {
                        out.triangles.push_back({cut(outside[0], inside[0]),
                                                 cut(outside[0], inside[1]),
                                                 cut(outside[0], inside[2])});
                    } else if (nin == 2) {
                        Vec3 a = cut(inside[0], outside[0]);
                        Vec3 b = cut(inside[0], outside[1]);
                        Vec3 c = cut(inside[1], outside[1]);
                        Vec3 d = cut(inside[1], outside[0]);
                        out.triangles.push_back({a, b, c});
                        out.triangles.push_back({a, c, d});
                    }
                }
            }
    return out;
}

// ---------------------------------------------------------------------------
// Plane slicing

namespace continuum_detail {

inline void split_rows(const std::array<Vec3, 9>& c, std::array<Vec3, 9>& lo,
                       std::array<Vec3, 9>& hi, bool along_u) {
    // de Casteljau at t = 1/2 per row (u) or per column (v)
    auto idx = [&](int i, int j) { return along_u ? 3 * j + i : 3 * i + j; };
    for (int j = 0; j < 3; ++j) {
        Vec3 a = c[idx(0, j)], b = c[idx(1, j)], d = c[idx(2, j)];
        Vec3 ab = 0.5 * (a + b), bd = 0.5 * (b + d), m = 0.5 * (ab + bd);
        lo[idx(0, j)] = a;
        lo[idx(1, j)] = ab;
        lo[idx(2, j)] = m;
        hi[idx(0, j)] = m;
        hi[idx(1, j)] = bd;
        hi[idx(2, j)] = d;
    }
}

inline void slice_patch(const Patch& p, const Vec3& q, const Vec3& n, double tol,
                        int depth, std::vector<std::pair<Vec3, Vec3>>& segs) {
    double lo = std::numeric_limits<double>::max(), hi = -lo;
    for (const Vec3& c : p.ctrl) {
        double d = (c - q).dot(n);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    if (lo > tol || hi < -tol) return;  // convex hull misses the plane
    // flat enough when every control point sits near the bilinear corner
    // interpolant
    bool flat = true;
    for (int j = 0; j < 3 && flat; ++j)
        for (int i = 0; i < 3 && flat; ++i) {
            double u = 0.5 * i, v = 0.5 * j;
            Vec3 bl = (1 - u) * (1 - v) * p.at(0, 0) + u * (1 - v) * p.at(2, 0) +
                      (1 - u) * v * p.at(0, 2) + u * v * p.at(2, 2);
            if ((p.at(i, j) - bl).norm() > tol) flat = false;
        }
    if (!flat && depth < 24) {
        Patch a, b, aa, ab, ba, bb;
        split_rows(p.ctrl, a.ctrl, b.ctrl, true);
        split_rows(a.ctrl, aa.ctrl, ab.ctrl, false);
        split_rows(b.ctrl, ba.ctrl, bb.ctrl, false);
        for (const Patch* s : {&aa, &ab, &ba, &bb})
            slice_patch(*s, q, n, tol, depth + 1, segs);
        return;
    }
    // intersect the two corner triangles with the plane
    const Vec3 tris[2][3] = {{p.at(0, 0), p.at(2, 0), p.at(2, 2)},
                             {p.at(0, 0), p.at(2, 2), p.at(0, 2)}};
    for (const auto& tri : tris) {
        std::vector<Vec3> pts;
        for (int c = 0; c < 3; ++c) {
            Vec3 a = tri[c], b = tri[(c + 1) % 3];
            double da = (a - q).dot(n), db = (b - q).dot(n);
            if ((da > 0) != (db > 0)) pts.push_back(a + da / (da - db) * (b - a));
        }
        if (pts.size() == 2 && (pts[0] - pts[1]).norm() > 1e-12)
            segs.push_back({pts[0], pts[1]});
    }
}

}  // namespace continuum_detail

/// Plane cross-section of a patch set as chained polylines; patches are
/// subdivided until flat to `tol`.
inline std::vector<std::vector<Vec3>> slice_plane(const PatchSet& ps,
                                                  const Vec3& point,
                                                  const Vec3& normal,
                                                  double tol = 1e-6) {
    if (normal.norm() == 0.0)
        throw std::invalid_argument("slice_plane: zero normal");
    Vec3 n = normal.normalized();
    std::vector<std::pair<Vec3, Vec3>> segs;
    for (const Patch& p : ps.patches)
        continuum_detail::slice_patch(p, point, n, tol, 0, segs);
    return continuum_detail::chain_segments(std::move(segs), std::max(tol, 1e-9));
}

}  // namespace cost

#endif  // COST_CONTINUUM_HPP_
