#ifndef COST_PLANAR_HPP_
#define COST_PLANAR_HPP_

#include "cost/types.hpp"

#include <cmath>
#include <stdexcept>

namespace cost {

/// A facet of a planar embedded graph, stored as the closed vertex walk
/// (vertices may repeat on pinch points such as the bowtie center).
struct Facet {
    std::vector<VertexId> walk;
    bool outer = false;
};

namespace planar_detail {

struct Dart {
    VertexId from, to;
    bool operator<(const Dart& o) const {
        return from != o.from ? from < o.from : to < o.to;
    }
};

}  // namespace planar_detail

/// Traces the facets of a planar embedded graph from vertex coordinates.
/// Bounded facets are walked counterclockwise; the outer facet is marked.
/// Only witness-tagged edges participate unless include_added is set.
inline std::vector<Facet> trace_facets(const CostGraph& g, const Embedding& e,
                                       bool include_added = false) {
    using planar_detail::Dart;
    // counterclockwise neighbor order per vertex
    std::map<VertexId, std::vector<VertexId>> rot;
    for (const auto& [edge, kind] : g.edges) {
        if (!include_added && kind != EdgeKind::Witness) continue;
        rot[edge.first].push_back(edge.second);
        rot[edge.second].push_back(edge.first);
    }
    for (auto& [v, nbrs] : rot) {
        const Vec3 p = e.at(v);
        std::sort(nbrs.begin(), nbrs.end(), [&](VertexId a, VertexId b) {
            Vec3 da = e.at(a) - p, db = e.at(b) - p;
            double aa = std::atan2(da.y(), da.x());
            double ab = std::atan2(db.y(), db.x());
            if (aa != ab) return aa < ab;
            return a < b;
        });
    }
    // next dart with face interior on the left: reverse, then step clockwise
    auto next_dart = [&](const Dart& d) -> Dart {
        const auto& nbrs = rot.at(d.to);
        auto it = std::find(nbrs.begin(), nbrs.end(), d.from);
        if (it == nbrs.end()) throw std::logic_error("broken rotation system");
        std::size_t i = static_cast<std::size_t>(it - nbrs.begin());
        std::size_t j = (i + nbrs.size() - 1) % nbrs.size();
        return Dart{d.to, nbrs[j]};
    };

    std::set<Dart> visited;
    std::vector<Facet> facets;
    for (const auto& [v, nbrs] : rot) {
        for (VertexId w : nbrs) {
            Dart start{v, w};
            if (visited.count(start)) continue;
            Facet f;
            Dart d = start;
            double area2 = 0.0;
            do {
                visited.insert(d);
                f.walk.push_back(d.from);
                const Vec3& a = e.at(d.from);
                const Vec3& b = e.at(d.to);
                area2 += a.x() * b.y() - b.x() * a.y();
                d = next_dart(d);
            } while (!(d.from == start.from && d.to == start.to));
            f.outer = area2 < 0.0;
            facets.push_back(std::move(f));
        }
    }
    int outer_count = 0;
    for (const auto& f : facets) outer_count += f.outer;
    if (outer_count != 1)
        throw std::runtime_error("planar facet tracing failed: graph is not a "
                                 "single planar patch");
    return facets;
}

/// Boundary vertices of an open planar CoST, ordered along the outer facet.
inline std::vector<VertexId> boundary_cycle(const CostGraph& g,
                                            const Embedding& e) {
    std::vector<Facet> facets = trace_facets(g, e);
    const Facet* outer = nullptr;
    for (const auto& f : facets)
        if (f.outer) outer = &f;
    if (!outer) throw std::runtime_error("no outer facet (closed structure?)");
    std::vector<VertexId> cycle;
    for (VertexId v : outer->walk)
        if (g.boundary.count(v)) cycle.push_back(v);
    std::set<VertexId> uniq(cycle.begin(), cycle.end());
    if (uniq.size() != cycle.size() || uniq.size() != g.boundary.size())
        throw std::runtime_error("boundary is not a simple cycle along the "
                                 "outer facet");
    // canonical start: smallest boundary id, orientation as traced
    auto it = std::min_element(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), it, cycle.end());
    return cycle;
}

}  // namespace cost

#endif  // COST_PLANAR_HPP_
