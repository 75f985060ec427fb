#ifndef COST_TRIANGULATION_HPP_
#define COST_TRIANGULATION_HPP_

#include "cost/core.hpp"
#include "cost/planar.hpp"

#include <array>

namespace cost {

/// Planar triangulation: internal faces only, boundary edges are the ones
/// with a single incident face.
struct Triangulation {
    int vertex_count = 0;
    std::vector<std::array<int, 3>> faces;
    std::map<int, Vec3> positions;  // optional

    std::map<EdgeKey, std::vector<int>> edge_faces() const {
        std::map<EdgeKey, std::vector<int>> out;
        for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
            const auto& t = faces[f];
            out[make_edge(t[0], t[1])].push_back(f);
            out[make_edge(t[1], t[2])].push_back(f);
            out[make_edge(t[0], t[2])].push_back(f);
        }
        return out;
    }
    bool has_edge(int u, int v) const {
        for (const auto& t : faces)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    if (t[i] == u && t[j] == v) return true;
        return false;
    }
};

/// Medial construction: one CoST vertex per triangulation edge, one witness
/// triangle per face. cost_ids, when given, pins the CoST vertex id per edge.
inline std::pair<CostGraph, Embedding> triangulation_to_cost(
    const Triangulation& t,
    const std::map<EdgeKey, VertexId>* cost_ids = nullptr) {
    auto ef = t.edge_faces();
    for (const auto& [e, fs] : ef)
        if (fs.size() > 2)
            throw std::invalid_argument("triangulation edge in >2 faces");

    std::map<EdgeKey, VertexId> ids;
    if (cost_ids) {
        ids = *cost_ids;
    } else {
        VertexId next = 0;
        for (const auto& [e, fs] : ef) ids[e] = next++;
    }

    CostGraph g;
    g.dimension = 2;
    Embedding emb;
    for (const auto& [e, fs] : ef) {
        VertexId v = ids.at(e);
        g.add_vertex(v);
        if (fs.size() == 1) g.boundary.insert(v);
        if (t.positions.count(e.first) && t.positions.count(e.second))
            emb.set(v, 0.5 * (t.positions.at(e.first) + t.positions.at(e.second)));
    }
    for (const auto& f : t.faces) {
        VertexId a = ids.at(make_edge(f[0], f[1]));
        VertexId b = ids.at(make_edge(f[1], f[2]));
        VertexId c = ids.at(make_edge(f[0], f[2]));
        g.add_simplex({a, b, c});
    }
    return {g, emb};
}

/// Result of the inverse medial construction, keeping the correspondence
/// between CoST vertices and triangulation edges.
struct TriangulationMap {
    Triangulation tri;
    std::map<EdgeKey, VertexId> edge_to_cost;   // t-edge -> CoST vertex
    std::map<VertexId, EdgeKey> cost_to_edge;
    std::vector<int> witness_to_face;           // witness index -> face index
};

/// Recovers the planar triangulation a bivariate CoST is the medial graph of.
/// Facets of the CoST embedding that are not witness triangles become
/// triangulation vertices; the outer facet is split at boundary vertices.
inline TriangulationMap cost_to_triangulation(const CostGraph& g,
                                              const Embedding& e) {
    if (g.dimension != 2)
        throw std::invalid_argument("cost_to_triangulation: bivariate only");
    ValidationReport vr = validate_cost(g);
    if (!vr.valid())
        throw std::invalid_argument("cost_to_triangulation: invalid CoST: " +
                                    vr.violations.front().message);

    std::map<std::vector<VertexId>, int> witness_index;
    for (int i = 0; i < static_cast<int>(g.witness.size()); ++i) {
        std::vector<VertexId> key = g.witness[i];
        std::sort(key.begin(), key.end());
        witness_index[key] = i;
    }

    std::vector<Facet> facets = trace_facets(g, e);

    // collect t-vertex incidence walks (CoST vertices = t-edges around them)
    std::vector<std::vector<VertexId>> tverts;
    for (const auto& f : facets) {
        if (f.walk.size() == 3) {
            std::vector<VertexId> key = f.walk;
            std::sort(key.begin(), key.end());
            if (witness_index.count(key)) continue;  // a t-face, not a t-vertex
        }
        if (f.outer && !g.boundary.empty()) {
            // split the outer walk at boundary-vertex visits; each segment
            // (inclusive of its delimiters) is one boundary t-vertex
            const auto& w = f.walk;
            std::vector<std::size_t> marks;
            for (std::size_t i = 0; i < w.size(); ++i)
                if (g.boundary.count(w[i])) marks.push_back(i);
            if (marks.empty())
                throw std::runtime_error("outer facet misses all boundary vertices");
            for (std::size_t mi = 0; mi < marks.size(); ++mi) {
                std::size_t a = marks[mi];
                std::size_t b = marks[(mi + 1) % marks.size()];
                std::vector<VertexId> seg;
                std::size_t i = a;
                seg.push_back(w[i]);
                while (i != b) {
                    i = (i + 1) % w.size();
                    seg.push_back(w[i]);
                }
                tverts.push_back(std::move(seg));
            }
        } else {
            tverts.push_back(f.walk);
        }
    }

    // canonical t-vertex order for reproducible ids
    auto normalize = [](std::vector<VertexId> w) {
        std::vector<VertexId> best = w;
        for (std::size_t r = 1; r < w.size(); ++r) {
            std::rotate(w.begin(), w.begin() + 1, w.end());
            if (w < best) best = w;
        }
        return best;
    };
    std::vector<std::pair<std::vector<VertexId>, std::vector<VertexId>>> keyed;
    for (auto& tv : tverts) keyed.push_back({normalize(tv), tv});
    std::sort(keyed.begin(), keyed.end());

    std::map<VertexId, std::vector<int>> endpoints;  // CoST vertex -> t-ids
    for (int id = 0; id < static_cast<int>(keyed.size()); ++id) {
        std::set<VertexId> seen;
        for (VertexId v : keyed[id].second) {
            if (seen.count(v))
                throw std::runtime_error("degenerate facet: t-edge loop at CoST "
                                         "vertex " + std::to_string(v));
            seen.insert(v);
            endpoints[v].push_back(id);
        }
    }
    for (VertexId v : g.vertices) {
        auto it = endpoints.find(v);
        if (it == endpoints.end() || it->second.size() != 2 ||
            it->second[0] == it->second[1])
            throw std::runtime_error("CoST vertex " + std::to_string(v) +
                                     " does not map to a proper t-edge");
    }

    TriangulationMap out;
    out.tri.vertex_count = static_cast<int>(keyed.size());
    for (VertexId v : g.vertices) {
        EdgeKey te = make_edge(endpoints[v][0], endpoints[v][1]);
        if (out.edge_to_cost.count(te))
            throw std::runtime_error("multi-edge in recovered triangulation");
        out.edge_to_cost[te] = v;
        out.cost_to_edge[v] = te;
    }

    auto shared_t = [&](VertexId a, VertexId b) -> int {
        for (int x : endpoints[a])
            for (int y : endpoints[b])
                if (x == y) return x;
        throw std::runtime_error("witness triangle corners do not close up");
    };
    out.witness_to_face.resize(g.witness.size());
    std::map<int, Vec3> pos_sum;
    std::map<int, int> pos_cnt;
    for (int wi = 0; wi < static_cast<int>(g.witness.size()); ++wi) {
        const auto& s = g.witness[wi];  // CoST vertices a, b, c
        int tab = shared_t(s[0], s[1]);
        int tbc = shared_t(s[1], s[2]);
        int tac = shared_t(s[0], s[2]);
        if (tab == tbc || tbc == tac || tab == tac)
            throw std::runtime_error("degenerate witness face in bijection");
        out.tri.faces.push_back({tbc, tac, tab});  // corner i opposite s[i]
        out.witness_to_face[wi] = static_cast<int>(out.tri.faces.size()) - 1;
        // medial inversion: corner shared by edges a and b sits at a + b - c
        const Vec3 pa = e.at(s[0]), pb = e.at(s[1]), pc = e.at(s[2]);
        auto acc = [&](int t, const Vec3& p) {
            pos_sum[t] = (pos_cnt.count(t) ? pos_sum[t] : Vec3::Zero().eval()) + p;
            pos_cnt[t] += 1;
        };
        acc(tab, pa + pb - pc);
        acc(tbc, pb + pc - pa);
        acc(tac, pa + pc - pb);
    }
    for (const auto& [t, s] : pos_sum) out.tri.positions[t] = s / pos_cnt.at(t);
    if (static_cast<int>(out.tri.positions.size()) != out.tri.vertex_count)
        throw std::runtime_error("some t-vertex received no position");
    return out;
}

/// Replaces shared edge (u,v) of two adjacent faces by the cross edge.
/// Returns the inserted edge (w,x).
inline EdgeKey flip_triangulation_edge(Triangulation& t, int u, int v) {
    auto ef = t.edge_faces();
    auto it = ef.find(make_edge(u, v));
    if (it == ef.end())
        throw std::invalid_argument("flip: no such triangulation edge");
    if (it->second.size() != 2)
        throw std::invalid_argument("flip: boundary edge");
    int f1 = it->second[0], f2 = it->second[1];
    auto third = [&](int f) {
        for (int c : t.faces[f])
            if (c != u && c != v) return c;
        throw std::logic_error("degenerate face");
    };
    int w = third(f1), x = third(f2);
    if (t.has_edge(w, x))
        throw std::invalid_argument("flip: cross edge already present");
    t.faces[f1] = {w, x, u};
    t.faces[f2] = {w, x, v};
    return make_edge(w, x);
}

/// Strict convexity of the quadrilateral around edge (u,v): all corner turns
/// must have the same sign and none may be degenerate within tol.
inline bool quad_strictly_convex(const Triangulation& t, int u, int v,
                                 double tol = 1e-9) {
    auto ef = t.edge_faces();
    auto it = ef.find(make_edge(u, v));
    if (it == ef.end() || it->second.size() != 2) return false;
    auto third = [&](int f) {
        for (int c : t.faces[f])
            if (c != u && c != v) return c;
        return -1;
    };
    int w = third(it->second[0]), x = third(it->second[1]);
    std::array<int, 4> quad = {u, w, v, x};
    double scale = 0.0;
    for (int i = 0; i < 4; ++i)
        scale = std::max(scale, (t.positions.at(quad[i]) -
                                 t.positions.at(quad[(i + 1) % 4])).norm());
    int sign = 0;
    for (int i = 0; i < 4; ++i) {
        Vec3 a = t.positions.at(quad[(i + 1) % 4]) - t.positions.at(quad[i]);
        Vec3 b = t.positions.at(quad[(i + 2) % 4]) - t.positions.at(quad[(i + 1) % 4]);
        double cr = a.x() * b.y() - a.y() * b.x();
        if (std::abs(cr) <= tol * scale * scale) return false;
        int s = cr > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        else if (s != sign) return false;
    }
    return true;
}

}  // namespace cost

#endif  // COST_TRIANGULATION_HPP_
