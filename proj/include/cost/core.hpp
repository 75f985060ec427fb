#ifndef COST_CORE_HPP_
#define COST_CORE_HPP_

#include "cost/types.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace cost {

namespace detail {

inline std::string fmt_simplex(const std::vector<VertexId>& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ")";
    return os.str();
}

}  // namespace detail

/// Checks every CoST invariant and reports all violations found.
/// Validity is defined by the stored witness set, not by counting
/// all K3/K4 subgraphs.
inline ValidationReport validate_cost(const CostGraph& g) {
    ValidationReport report;
    auto complain = [&](const std::string& m) { report.violations.push_back({m}); };

    const int d = g.dimension;
    if (d != 2 && d != 3) {
        complain("dimension must be 2 or 3");
        return report;
    }
    const std::size_t simplex_size = (d == 2) ? 3u : 4u;

    for (const auto& [e, kind] : g.edges) {
        if (!g.has_vertex(e.first) || !g.has_vertex(e.second))
            complain("edge (" + std::to_string(e.first) + "," +
                     std::to_string(e.second) + ") references unknown vertex");
        if (e.first == e.second)
            complain("loop edge at vertex " + std::to_string(e.first));
    }
    for (VertexId v : g.boundary)
        if (!g.has_vertex(v))
            complain("boundary id " + std::to_string(v) + " is not a vertex");

    // Simplex sanity + edge coverage counts.
    std::map<EdgeKey, int> edge_cover;
    std::map<VertexId, int> vertex_cover;
    for (std::size_t si = 0; si < g.witness.size(); ++si) {
        const auto& s = g.witness[si];
        if (s.size() != simplex_size) {
            complain("witness simplex " + detail::fmt_simplex(s) +
                     " has wrong size for dimension " + std::to_string(d));
            continue;
        }
        std::set<VertexId> uniq(s.begin(), s.end());
        if (uniq.size() != s.size()) {
            complain("witness simplex " + detail::fmt_simplex(s) +
                     " repeats a vertex");
            continue;
        }
        for (VertexId v : s) {
            ++vertex_cover[v];
            if (!g.has_vertex(v))
                complain("witness simplex " + detail::fmt_simplex(s) +
                         " references unknown vertex " + std::to_string(v));
        }
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j) {
                EdgeKey e = make_edge(s[i], s[j]);
                ++edge_cover[e];
                auto it = g.edges.find(e);
                if (it == g.edges.end())
                    complain("simplex edge (" + std::to_string(e.first) + "," +
                             std::to_string(e.second) + ") missing from edge set");
                else if (it->second != EdgeKind::Witness)
                    complain("simplex edge (" + std::to_string(e.first) + "," +
                             std::to_string(e.second) + ") tagged as added");
            }
    }

    for (const auto& [e, c] : edge_cover)
        if (c > 1)
            complain("edge (" + std::to_string(e.first) + "," +
                     std::to_string(e.second) + ") lies in " + std::to_string(c) +
                     " witness simplices");
    for (const auto& [e, kind] : g.edges) {
        if (kind != EdgeKind::Witness) continue;
        if (edge_cover.find(e) == edge_cover.end())
            complain("witness-tagged edge (" + std::to_string(e.first) + "," +
                     std::to_string(e.second) + ") lies in no witness simplex");
    }

    for (VertexId v : g.vertices) {
        const bool bnd = g.boundary.count(v) > 0;
        const int expect_simplices = bnd ? 1 : 2;
        const int expect_degree = bnd ? d : 2 * d;
        auto it = vertex_cover.find(v);
        const int cover = (it == vertex_cover.end()) ? 0 : it->second;
        if (cover != expect_simplices)
            complain("vertex " + std::to_string(v) + " in " +
                     std::to_string(cover) + " witness simplices, expected " +
                     std::to_string(expect_simplices));
        const int wdeg = g.witness_degree(v);
        if (wdeg != expect_degree)
            complain("vertex " + std::to_string(v) + " has witness degree " +
                     std::to_string(wdeg) + ", expected " +
                     std::to_string(expect_degree));
    }

    if (g.coloring) {
        if (g.coloring->size() != g.witness.size())
            complain("coloring size does not match witness set");
        else {
            for (std::size_t i = 0; i < g.witness.size(); ++i)
                for (std::size_t j = i + 1; j < g.witness.size(); ++j) {
                    bool share = false;
                    for (VertexId v : g.witness[i])
                        if (std::find(g.witness[j].begin(), g.witness[j].end(), v) !=
                            g.witness[j].end())
                            share = true;
                    if (share && (*g.coloring)[i] == (*g.coloring)[j])
                        complain("vertex-sharing simplices " + std::to_string(i) +
                                 " and " + std::to_string(j) + " share a color");
                }
        }
    }
    return report;
}

/// Collapses each witness simplex to one vertex; interior CoST vertices
/// become edges, boundary ones dangling stubs.
inline RegularGraph cost_to_regular(const CostGraph& g) {
    ValidationReport r = validate_cost(g);
    if (!r.valid())
        throw std::invalid_argument("cost_to_regular: invalid CoST: " +
                                    r.violations.front().message);
    RegularGraph out;
    out.regularity = g.dimension + 1;
    out.vertices.resize(g.witness.size());
    for (std::size_t i = 0; i < g.witness.size(); ++i) out.vertices[i] = (int)i;
    for (VertexId v : g.vertices) {
        std::vector<int> s = g.simplices_of(v);
        if (s.size() == 2)
            out.edge_list.push_back(make_edge(s[0], s[1]));
        else if (s.size() == 1)
            out.stubs[s[0]] += 1;
    }
    std::sort(out.edge_list.begin(), out.edge_list.end());
    return out;
}

/// Inverse of cost_to_regular: one CoST vertex per regular edge or stub,
/// a witness clique per regular vertex.
inline CostGraph regular_to_cost(const RegularGraph& r) {
    const int k = r.regularity;
    if (k != 3 && k != 4)
        throw std::invalid_argument("regular_to_cost: regularity must be 3 or 4");
    for (VertexId v : r.vertices)
        if (r.degree(v) != k)
            throw std::invalid_argument("regular_to_cost: vertex " +
                                        std::to_string(v) + " has degree " +
                                        std::to_string(r.degree(v)));

    CostGraph g;
    g.dimension = k - 1;
    // mid-edge vertices per regular vertex, in deterministic order
    std::map<VertexId, std::vector<VertexId>> incident;
    VertexId next = 0;
    for (const auto& e : r.edge_list) {
        incident[e.first].push_back(next);
        incident[e.second].push_back(next);
        g.add_vertex(next);
        ++next;
    }
    for (const auto& [v, n] : r.stubs) {
        for (int i = 0; i < n; ++i) {
            incident[v].push_back(next);
            g.add_vertex(next);
            g.boundary.insert(next);
            ++next;
        }
    }
    for (VertexId v : r.vertices) g.add_simplex(incident.at(v));
    return g;
}

/// Unit edge-direction vectors at a vertex. Throws on a zero-length edge.
inline std::vector<Vec3> edge_directions(const CostGraph& g, const Embedding& e,
                                         VertexId v) {
    std::vector<Vec3> dirs;
    for (VertexId w : g.neighbors(v)) {
        Vec3 d = e.at(w) - e.at(v);
        double n = d.norm();
        if (n <= 0.0)
            throw std::invalid_argument("zero-length edge at vertex " +
                                        std::to_string(v));
        dirs.push_back(d / n);
    }
    return dirs;
}

/// A joint is balanced when the origin lies strictly inside the convex hull
/// of its unit edge directions, so every line (plane) through the joint has
/// bar vectors strictly on both sides.
inline bool vertex_balanced(const CostGraph& g, const Embedding& e, VertexId v,
                            double tol = 1e-9) {
    std::vector<Vec3> dirs = edge_directions(g, e, v);
    if (dirs.size() < 2) return false;
    if (g.dimension == 2) {
        std::vector<double> angles;
        for (const Vec3& d : dirs) angles.push_back(std::atan2(d.y(), d.x()));
        std::sort(angles.begin(), angles.end());
        double max_gap = 2.0 * M_PI - (angles.back() - angles.front());
        for (std::size_t i = 1; i < angles.size(); ++i)
            max_gap = std::max(max_gap, angles[i] - angles[i - 1]);
        return max_gap < M_PI - tol;
    }
    // 3D: the origin must lie strictly inside the hull of the direction
    // vectors. Enumerate candidate hull faces over all triples; the origin is
    // interior iff it sits strictly on the inner side of every face.
    const std::size_t n = dirs.size();
    if (n < 4) return false;
    bool found_face = false;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                Vec3 m = (dirs[j] - dirs[i]).cross(dirs[k] - dirs[i]);
                double nm = m.norm();
                if (nm < 1e-14) continue;  // collinear triple
                m /= nm;
                double lo = 0.0, hi = 0.0;
                for (const Vec3& d : dirs) {
                    double s = m.dot(d - dirs[i]);
                    lo = std::min(lo, s);
                    hi = std::max(hi, s);
                }
                const double eps = 1e-12;
                if (lo >= -eps) {           // all points on +m side: face
                    found_face = true;
                    if (m.dot(dirs[i]) >= -tol) return false;
                } else if (hi <= eps) {     // all points on -m side: face
                    found_face = true;
                    if (m.dot(dirs[i]) <= tol) return false;
                }
            }
    // no supporting plane at all means the points were degenerate
    return found_face;
}

inline std::map<VertexId, bool> balance_check(const CostGraph& g,
                                              const Embedding& e,
                                              double tol = 1e-9) {
    std::map<VertexId, bool> out;
    for (VertexId v : g.vertices) out[v] = vertex_balanced(g, e, v, tol);
    return out;
}

struct UnitDistanceResult {
    bool ok = true;
    EdgeKey worst_edge{-1, -1};
    double worst_deviation = 0.0;
};

/// True iff every edge length is within tol of some member of `lengths`.
inline UnitDistanceResult unit_distance_check(const CostGraph& g,
                                              const Embedding& e,
                                              const std::vector<double>& lengths,
                                              double tol = 1e-9) {
    UnitDistanceResult res;
    for (const auto& [edge, kind] : g.edges) {
        double len = e.edge_length(edge.first, edge.second);
        double dev = std::numeric_limits<double>::infinity();
        for (double l : lengths) dev = std::min(dev, std::abs(len - l));
        if (dev > res.worst_deviation) {
            res.worst_deviation = dev;
            res.worst_edge = edge;
        }
        if (dev > tol) res.ok = false;
    }
    return res;
}

/// Proper 2-coloring of the simplex-adjacency graph (simplices adjacent iff
/// they share a vertex). Deterministic: lowest-index simplex gets Blue.
inline std::vector<Color> two_color(const CostGraph& g) {
    const int n = static_cast<int>(g.witness.size());
    std::vector<std::vector<int>> adj(n);
    std::map<VertexId, std::vector<int>> by_vertex;
    for (int i = 0; i < n; ++i)
        for (VertexId v : g.witness[i]) by_vertex[v].push_back(i);
    for (const auto& [v, list] : by_vertex)
        for (std::size_t a = 0; a < list.size(); ++a)
            for (std::size_t b = a + 1; b < list.size(); ++b) {
                adj[list[a]].push_back(list[b]);
                adj[list[b]].push_back(list[a]);
            }
    std::vector<int> color(n, -1);
    for (int s = 0; s < n; ++s) {
        if (color[s] != -1) continue;
        color[s] = 0;
        std::deque<int> queue{s};
        while (!queue.empty()) {
            int i = queue.front();
            queue.pop_front();
            for (int j : adj[i]) {
                if (color[j] == -1) {
                    color[j] = 1 - color[i];
                    queue.push_back(j);
                } else if (color[j] == color[i]) {
                    throw std::runtime_error("not 2-colorable: odd simplex cycle "
                                             "through simplices " +
                                             std::to_string(i) + " and " +
                                             std::to_string(j));
                }
            }
        }
    }
    std::vector<Color> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = color[i] == 0 ? Color::Blue : Color::Green;
    return out;
}

}  // namespace cost

#endif  // COST_CORE_HPP_
