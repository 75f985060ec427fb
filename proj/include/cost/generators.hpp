#ifndef COST_GENERATORS_HPP_
#define COST_GENERATORS_HPP_

#include "cost/triangulation.hpp"

namespace cost {

enum class Topology2d { Open, Toroidal };

/// rows x cols parallelogram patch of the 3-direction triangular grid.
/// Edge directions are (1,0), (0,1) and (-1,1) in lattice coordinates.
inline Triangulation grid_triangulation(int rows, int cols,
                                        double edge_length = 1.0) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("grid_triangulation: rows, cols >= 1");
    Triangulation t;
    const Vec3 a1(edge_length, 0, 0);
    const Vec3 a2(edge_length * 0.5, edge_length * std::sqrt(3.0) / 2.0, 0);
    auto vid = [&](int i, int j) { return j * (cols + 1) + i; };
    t.vertex_count = (rows + 1) * (cols + 1);
    for (int j = 0; j <= rows; ++j)
        for (int i = 0; i <= cols; ++i)
            t.positions[vid(i, j)] = i * a1 + j * a2;
    for (int j = 0; j < rows; ++j)
        for (int i = 0; i < cols; ++i) {
            t.faces.push_back({vid(i, j), vid(i + 1, j), vid(i, j + 1)});
            t.faces.push_back({vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    return t;
}

/// Medial Kagome CoST of the 3-direction grid. All CoST edges have length
/// edge_length / 2. Toroidal patches carry flat-torus coordinates in the
/// fundamental cell; only their combinatorics are geometric.
inline std::pair<CostGraph, Embedding> kagome_2d(int rows, int cols,
                                                 double edge_length = 1.0,
                                                 Topology2d topology = Topology2d::Open) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("kagome_2d: rows, cols >= 1");
    if (topology == Topology2d::Open)
        return triangulation_to_cost(grid_triangulation(rows, cols, edge_length));

    if (rows < 2 || cols < 2)
        throw std::invalid_argument("kagome_2d: toroidal requires rows, cols >= 2");
    CostGraph g;
    g.dimension = 2;
    Embedding e;
    const Vec3 a1(edge_length, 0, 0);
    const Vec3 a2(edge_length * 0.5, edge_length * std::sqrt(3.0) / 2.0, 0);
    // three CoST vertices per unit cell: right, up, diagonal edge midpoints
    auto right = [&](int i, int j) { return 3 * (j * cols + i); };
    auto up = [&](int i, int j) { return 3 * (j * cols + i) + 1; };
    auto diag = [&](int i, int j) { return 3 * (j * cols + i) + 2; };
    for (int j = 0; j < rows; ++j)
        for (int i = 0; i < cols; ++i) {
            g.add_vertex(right(i, j));
            g.add_vertex(up(i, j));
            g.add_vertex(diag(i, j));
            e.set(right(i, j), (i + 0.5) * a1 + j * a2);
            e.set(up(i, j), i * a1 + (j + 0.5) * a2);
            e.set(diag(i, j), (i + 0.5) * a1 + (j + 0.5) * a2);
        }
    for (int j = 0; j < rows; ++j)
        for (int i = 0; i < cols; ++i) {
            int in = (i + 1) % cols, jn = (j + 1) % rows;
            g.add_simplex({right(i, j), up(i, j), diag(i, j)});           // up face
            g.add_simplex({diag(i, j), up(in, j), right(i, jn)});         // down face
        }
    return {g, e};
}

/// Stacking parameters for building trivariate CoSTs from 2-colored layers.
/// Even gaps connect blue triangle pairs, odd gaps green pairs.
struct FoliationSpec {
    double half_spacing = 0.5;                    // apex planes sit at z +- h
    std::vector<Eigen::Vector2d> layer_shifts;    // defaults to zero
};

struct Layer {
    CostGraph graph;
    Embedding embedding;
    std::vector<Color> coloring;
};

/// Connects corresponding same-color triangles of consecutive layers through
/// a shared apex vertex, producing a foliated trivariate CoST. In-layer
/// edges of triangles that stay unmatched (top/bottom layers) are retagged
/// as non-witness.
inline std::pair<CostGraph, Embedding> foliate(const std::vector<Layer>& layers,
                                               const FoliationSpec& spec) {
    if (layers.size() < 2)
        throw std::invalid_argument("foliate: need at least 2 layers");
    if (spec.half_spacing <= 0)
        throw std::invalid_argument("foliate: half_spacing must be positive");

    const int n = static_cast<int>(layers.size());
    int blue0 = -1, green0 = -1;
    for (const auto& l : layers) {
        if (l.graph.dimension != 2)
            throw std::invalid_argument("foliate: layers must be bivariate");
        ValidationReport r = validate_cost(l.graph);
        if (!r.valid())
            throw std::invalid_argument("foliate: invalid layer: " +
                                        r.violations.front().message);
        int b = 0, gr = 0;
        for (Color c : l.coloring) (c == Color::Blue ? b : gr)++;
        if (blue0 < 0) { blue0 = b; green0 = gr; }
        else if (b != blue0 || gr != green0)
            throw std::invalid_argument("foliate: mismatched blue/green counts");
    }

    std::vector<Eigen::Vector2d> shifts = spec.layer_shifts;
    shifts.resize(n, Eigen::Vector2d::Zero());
    const double h = spec.half_spacing;

    CostGraph out;
    out.dimension = 3;
    Embedding emb;
    std::vector<std::map<VertexId, VertexId>> remap(n);
    std::vector<std::vector<VertexId>> layer_ids;
    VertexId next = 0;
    double edge_scale = 0.0;
    {
        std::vector<double> lens;
        for (const auto& [ek, kind] : layers[0].graph.edges)
            lens.push_back(layers[0].embedding.edge_length(ek.first, ek.second));
        std::sort(lens.begin(), lens.end());
        edge_scale = lens[lens.size() / 2];
    }

    for (int k = 0; k < n; ++k) {
        std::vector<VertexId> ids;
        for (VertexId v : layers[k].graph.vertices) {
            remap[k][v] = next;
            out.add_vertex(next);
            ids.push_back(next);
            Vec3 p = layers[k].embedding.at(v);
            emb.set(next, Vec3(p.x() + shifts[k].x(), p.y() + shifts[k].y(),
                               k * 2.0 * h));
            ++next;
        }
        layer_ids.push_back(std::move(ids));
        for (const auto& [ek, kind] : layers[k].graph.edges)
            out.add_edge(remap[k][ek.first], remap[k][ek.second], kind);
    }

    auto centroid = [&](int k, int ti) {
        Vec3 c = Vec3::Zero();
        for (VertexId v : layers[k].graph.witness[ti]) c += emb.at(remap[k][v]);
        return Vec3(c / 3.0);
    };

    std::vector<std::vector<VertexId>> gap_ids;
    for (int k = 0; k + 1 < n; ++k) {
        const Color gap_color = (k % 2 == 0) ? Color::Blue : Color::Green;
        std::vector<int> lower, upper;
        for (int i = 0; i < (int)layers[k].coloring.size(); ++i)
            if (layers[k].coloring[i] == gap_color) lower.push_back(i);
        for (int i = 0; i < (int)layers[k + 1].coloring.size(); ++i)
            if (layers[k + 1].coloring[i] == gap_color) upper.push_back(i);
        if (lower.size() != upper.size())
            throw std::invalid_argument("foliate: gap triangle count mismatch");

        std::vector<bool> used(upper.size(), false);
        std::vector<VertexId> apexes;
        for (int ti : lower) {
            Vec3 c1 = centroid(k, ti);
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t ui = 0; ui < upper.size(); ++ui) {
                if (used[ui]) continue;
                Vec3 c2 = centroid(k + 1, upper[ui]);
                double d = std::hypot(c2.x() - c1.x(), c2.y() - c1.y());
                if (d < best_d) { best_d = d; best = (int)ui; }
            }
            if (best < 0 || best_d > edge_scale / 10.0)
                throw std::invalid_argument("foliate: no matching triangle within "
                                            "tolerance in gap " + std::to_string(k));
            used[best] = true;
            Vec3 c2 = centroid(k + 1, upper[best]);

            VertexId apex = next++;
            out.add_vertex(apex);
            apexes.push_back(apex);
            Vec3 mid = 0.5 * (c1 + c2);
            emb.set(apex, Vec3(mid.x(), mid.y(), (2 * k + 1) * h));

            std::vector<VertexId> lo, hi;
            for (VertexId v : layers[k].graph.witness[ti]) lo.push_back(remap[k][v]);
            for (VertexId v : layers[k + 1].graph.witness[upper[best]])
                hi.push_back(remap[k + 1][v]);
            std::vector<VertexId> tet_lo = lo, tet_hi = hi;
            tet_lo.push_back(apex);
            tet_hi.push_back(apex);
            for (VertexId v : lo) out.add_edge(apex, v);
            for (VertexId v : hi) out.add_edge(apex, v);
            out.witness.push_back(tet_lo);
            out.witness.push_back(tet_hi);
        }
        gap_ids.push_back(std::move(apexes));
    }

    // retag edges not covered by any tetrahedron (unmatched boundary-layer
    // triangles keep their bars but lose witness status)
    std::set<EdgeKey> covered;
    for (const auto& s : out.witness)
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j)
                covered.insert(make_edge(s[i], s[j]));
    for (auto& [ek, kind] : out.edges)
        if (!covered.count(ek)) kind = EdgeKind::Added;

    // boundary = vertices in fewer than two tetrahedra
    for (VertexId v : out.vertices)
        if (out.simplices_of(v).size() < 2) out.boundary.insert(v);

    out.layers = std::vector<std::vector<VertexId>>();
    for (int k = 0; k < n; ++k) {
        out.layers->push_back(layer_ids[k]);
        if (k + 1 < n) out.layers->push_back(gap_ids[k]);
    }
    return {out, emb};
}

/// Foliated trivariate Kagome: identical Kagome layers stacked so that every
/// tetrahedron is regular with edge edge_length / 2.
inline std::pair<CostGraph, Embedding> kagome_3d(int rows, int cols, int layers,
                                                 double edge_length = 1.0,
                                                 Topology2d topology = Topology2d::Open) {
    if (layers < 2) throw std::invalid_argument("kagome_3d: layers >= 2");
    auto [g2, e2] = kagome_2d(rows, cols, edge_length, topology);
    std::vector<Color> coloring = two_color(g2);
    std::vector<Layer> stack(layers, Layer{g2, e2, coloring});
    FoliationSpec spec;
    spec.half_spacing = (edge_length / 2.0) * std::sqrt(2.0 / 3.0);
    return foliate(stack, spec);
}

/// Built-in domain maps applied to embeddings; the graph is untouched.
struct MapSpec {
    enum class Kind { Identity, Affine, SphereOctant };
    Kind kind = Kind::Identity;
    Eigen::Matrix3d linear = Eigen::Matrix3d::Identity();
    Vec3 offset = Vec3::Zero();
};

inline Vec3 apply_map_point(const MapSpec& m, const Vec3& p, double tol = 1e-9) {
    switch (m.kind) {
        case MapSpec::Kind::Identity:
            return p;
        case MapSpec::Kind::Affine:
            return m.linear * p + m.offset;
        case MapSpec::Kind::SphereOctant: {
            // unit tetrahedron {x,y,z >= 0, x+y+z <= 1} to the unit ball
            // octant: the plane x+y+z = t maps to the sphere of radius t
            double s = p.x() + p.y() + p.z();
            if (p.x() < -tol || p.y() < -tol || p.z() < -tol || s > 1.0 + tol)
                throw std::domain_error("sphere-octant map: point outside the "
                                        "unit tetrahedron");
            double n2 = p.norm();
            if (n2 < tol) return Vec3::Zero();
            return (s / n2) * p;
        }
    }
    return p;
}

inline Embedding apply_map(const Embedding& e, const MapSpec& m,
                           double tol = 1e-9) {
    Embedding out;
    for (const auto& [v, p] : e.pos) out.set(v, apply_map_point(m, p, tol));
    return out;
}

}  // namespace cost

#endif  // COST_GENERATORS_HPP_
