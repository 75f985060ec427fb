#ifndef COST_TYPES_HPP_
#define COST_TYPES_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cost {

using Vec3 = Eigen::Vector3d;
using VertexId = int;
using EdgeKey = std::pair<VertexId, VertexId>;

inline EdgeKey make_edge(VertexId u, VertexId v) {
    return u < v ? EdgeKey{u, v} : EdgeKey{v, u};
}

/// Whether an edge is covered by a witness simplex or was added later
/// (stiffening, joining).
enum class EdgeKind { Witness, Added };

enum class Color { Blue, Green };

/// Constraint graph whose structure is certified by a witness set of
/// edge-disjoint simplices (triangles for dimension 2, tetrahedra for 3).
struct CostGraph {
    int dimension = 2;
    std::vector<VertexId> vertices;                 // sorted, unique
    std::map<EdgeKey, EdgeKind> edges;
    std::vector<std::vector<VertexId>> witness;     // simplex vertex lists
    std::set<VertexId> boundary;
    std::optional<std::vector<Color>> coloring;     // per witness index
    std::optional<std::vector<std::vector<VertexId>>> layers;

    bool has_vertex(VertexId v) const {
        return std::binary_search(vertices.begin(), vertices.end(), v);
    }
    bool has_edge(VertexId u, VertexId v) const {
        return edges.count(make_edge(u, v)) > 0;
    }
    void add_vertex(VertexId v) {
        auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
        if (it == vertices.end() || *it != v) vertices.insert(it, v);
    }
    void add_edge(VertexId u, VertexId v, EdgeKind kind = EdgeKind::Witness) {
        edges[make_edge(u, v)] = kind;
    }
    void remove_edge(VertexId u, VertexId v) { edges.erase(make_edge(u, v)); }

    /// Adds a simplex to the witness set, inserting its edges as needed.
    void add_simplex(const std::vector<VertexId>& s) {
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j)
                if (!has_edge(s[i], s[j])) add_edge(s[i], s[j]);
        witness.push_back(s);
    }

    int degree(VertexId v) const {
        int d = 0;
        for (const auto& [e, k] : edges)
            if (e.first == v || e.second == v) ++d;
        return d;
    }
    int witness_degree(VertexId v) const {
        int d = 0;
        for (const auto& [e, k] : edges)
            if (k == EdgeKind::Witness && (e.first == v || e.second == v)) ++d;
        return d;
    }

    std::vector<VertexId> neighbors(VertexId v) const {
        std::vector<VertexId> out;
        for (const auto& [e, k] : edges) {
            if (e.first == v) out.push_back(e.second);
            else if (e.second == v) out.push_back(e.first);
        }
        return out;
    }

    /// Witness simplex indices containing v, in witness-list order.
    std::vector<int> simplices_of(VertexId v) const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(witness.size()); ++i)
            if (std::find(witness[i].begin(), witness[i].end(), v) != witness[i].end())
                out.push_back(i);
        return out;
    }

    VertexId max_vertex_id() const {
        return vertices.empty() ? -1 : vertices.back();
    }
};

/// Coordinates per vertex. z is kept zero for bivariate structures.
struct Embedding {
    std::map<VertexId, Vec3> pos;

    const Vec3& at(VertexId v) const { return pos.at(v); }
    void set(VertexId v, const Vec3& p) { pos[v] = p; }
    double edge_length(VertexId u, VertexId v) const {
        return (pos.at(u) - pos.at(v)).norm();
    }
};

/// k-regular graph with dangling stubs standing in for boundary incidences.
struct RegularGraph {
    int regularity = 3;
    std::vector<VertexId> vertices;
    std::vector<EdgeKey> edge_list;     // may contain parallel edges
    std::map<VertexId, int> stubs;      // dangling half-edges per vertex

    int degree(VertexId v) const {
        int d = 0;
        for (const auto& e : edge_list)
            d += (e.first == v) + (e.second == v);
        auto it = stubs.find(v);
        if (it != stubs.end()) d += it->second;
        return d;
    }
};

struct Violation {
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool valid() const { return violations.empty(); }
};

enum class StiffenVariant { Edges, Pins, Sliders };

struct SliderLine {
    Vec3 anchor;
    Vec3 direction;  // unit; the constraint normal is its 2D perpendicular
};

/// A CoST plus grounding data that makes it isostatic.
struct StiffenedStructure {
    CostGraph base;  // added edges carry EdgeKind::Added
    StiffenVariant variant = StiffenVariant::Edges;
    std::vector<EdgeKey> added_edges;
    std::map<VertexId, Vec3> pins;
    std::map<VertexId, SliderLine> sliders;
};

}  // namespace cost

#endif  // COST_TYPES_HPP_
