#ifndef COST_EDITING_HPP_
#define COST_EDITING_HPP_

#include "cost/rigidity.hpp"
#include "cost/triangulation.hpp"

#include <random>
#include <sstream>

namespace cost {

// ---------------------------------------------------------------------------
// Stiffening

/// Grounds an open bivariate CoST. Edges variant adds boundary-cycle chords
/// until the pebble game reports 2|V|-3 independent edges; pins fix every
/// other boundary vertex; sliders put one generically oriented line under
/// each boundary vertex. The seed rotates the anchor choice and draws the
/// slider directions.
inline StiffenedStructure stiffen(const CostGraph& g, const Embedding& e,
                                  StiffenVariant variant, unsigned seed = 0) {
    if (g.dimension != 2)
        throw std::invalid_argument("stiffen: bivariate structures only");
    std::vector<VertexId> cycle = boundary_cycle(g, e);
    for (VertexId v : cycle)
        if (g.degree(v) != 2)
            throw std::invalid_argument("stiffen: boundary vertex " +
                                        std::to_string(v) + " has degree != 2");
    const std::size_t nb = cycle.size();
    StiffenedStructure s;
    s.base = g;
    s.variant = variant;
    std::mt19937 rng(seed + 1u);

    if (variant == StiffenVariant::Edges) {
        const int target = 2 * static_cast<int>(g.vertices.size()) - 3;
        std::size_t off = seed % nb;
        for (std::size_t i = 0; i < nb; ++i) {
            if (static_cast<int>(s.base.edges.size()) == target) break;
            VertexId u = cycle[(i + off) % nb];
            VertexId v = cycle[(i + off + 1) % nb];
            if (s.base.has_edge(u, v)) continue;
            s.base.add_edge(u, v, EdgeKind::Added);
            auto rep = pebble_game(s.base, 2, 3);
            if (!rep.independent) {
                s.base.remove_edge(u, v);
                continue;
            }
            s.added_edges.push_back(make_edge(u, v));
        }
        auto rep = pebble_game(s.base, 2, 3);
        if (!rep.minimally_rigid) {
            std::ostringstream os;
            os << "stiffen: boundary chords insufficient; free dof "
               << rep.free_dof;
            for (const auto& re : rep.redundant_edges)
                os << " redundant (" << re.first << "," << re.second << ")";
            throw std::runtime_error(os.str());
        }
        return s;
    }

    if (variant == StiffenVariant::Pins) {
        for (std::size_t i = 0; i < nb; i += 2) s.pins[cycle[i]] = e.at(cycle[i]);
        // lattice geometry can make alternating pins degenerate (collinear
        // pin-joint lines); pin further boundary vertices until grounded
        for (std::size_t i = 1; i < nb && analyze_rigidity(s, e).dof > 0; i += 2)
            s.pins[cycle[i]] = e.at(cycle[i]);
    } else {
        std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
        for (VertexId v : cycle) {
            double a = ang(rng);
            s.sliders[v] = SliderLine{e.at(v), Vec3(std::cos(a), std::sin(a), 0)};
        }
    }
    auto rep = analyze_rigidity(s, e);
    if (rep.dof != 0)
        throw std::runtime_error("stiffen: grounded structure still has " +
                                 std::to_string(rep.dof) + " dof");
    return s;
}

/// Greedy boundary-edge stiffening of an open trivariate CoST: candidate
/// chords sorted by length are accepted whenever they enlarge the row space
/// of the rigidity matrix, until rank 3|V|-6.
inline StiffenedStructure stiffen_3d(const CostGraph& g, const Embedding& e) {
    if (g.dimension != 3)
        throw std::invalid_argument("stiffen_3d: trivariate structures only");
    if (g.boundary.empty())
        throw std::invalid_argument("stiffen_3d: structure has no boundary");
    auto idx = column_index(g);
    const int cols = 3 * static_cast<int>(g.vertices.size());
    const int target = cols - 6;

    auto edge_row = [&](VertexId u, VertexId v) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(cols);
        Vec3 dlt = e.at(u) - e.at(v);
        for (int c = 0; c < 3; ++c) {
            row(3 * idx[u] + c) = dlt(c);
            row(3 * idx[v] + c) = -dlt(c);
        }
        return row;
    };

    std::vector<Eigen::VectorXd> basis;  // orthonormal row-space basis
    auto try_insert = [&](const Eigen::VectorXd& row) {
        Eigen::VectorXd r = row;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) r -= q.dot(r) * q;
        if (r.norm() <= 1e-9 * row.norm()) return false;
        basis.push_back(r.normalized());
        return true;
    };
    for (const auto& [ek, kind] : g.edges) try_insert(edge_row(ek.first, ek.second));

    StiffenedStructure s;
    s.base = g;
    s.variant = StiffenVariant::Edges;
    if (static_cast<int>(basis.size()) >= target) return s;

    std::vector<std::tuple<double, VertexId, VertexId>> cands;
    std::vector<VertexId> bnd(g.boundary.begin(), g.boundary.end());
    for (std::size_t i = 0; i < bnd.size(); ++i)
        for (std::size_t j = i + 1; j < bnd.size(); ++j)
            if (!g.has_edge(bnd[i], bnd[j]))
                cands.emplace_back(e.edge_length(bnd[i], bnd[j]), bnd[i], bnd[j]);
    std::sort(cands.begin(), cands.end());
    for (const auto& [len, u, v] : cands) {
        if (static_cast<int>(basis.size()) == target) break;
        if (try_insert(edge_row(u, v))) {
            s.base.add_edge(u, v, EdgeKind::Added);
            s.added_edges.push_back(make_edge(u, v));
        }
    }
    if (static_cast<int>(basis.size()) < target)
        throw std::runtime_error(
            "stiffen_3d: rank target unreachable with boundary edges (rank " +
            std::to_string(basis.size()) + " of " + std::to_string(target) + ")");
    return s;
}

// ---------------------------------------------------------------------------
// Refinement

enum class RefineRule { R0, R1 };

/// Splits every edge at a midpoint vertex and rebuilds the witness set from
/// corner triangles. R0 cycles the midpoints inside each witness triangle,
/// R1 cycles them around every non-witness facet (the outer facet included).
inline std::pair<CostGraph, Embedding> refine(const CostGraph& g,
                                              const Embedding& e,
                                              RefineRule rule) {
    if (g.dimension != 2)
        throw std::invalid_argument("refine: bivariate structures only");
    for (const auto& [ek, kind] : g.edges)
        if (kind != EdgeKind::Witness)
            throw std::invalid_argument("refine: remove stiffening edges first");

    CostGraph out;
    out.dimension = 2;
    Embedding eo;
    for (VertexId v : g.vertices) {
        out.add_vertex(v);
        eo.set(v, e.at(v));
    }
    VertexId next = g.max_vertex_id() + 1;
    std::map<EdgeKey, VertexId> mid;
    for (const auto& [ek, kind] : g.edges) {
        mid[ek] = next;
        out.add_vertex(next);
        eo.set(next, 0.5 * (e.at(ek.first) + e.at(ek.second)));
        ++next;
    }

    if (rule == RefineRule::R0) {
        for (const auto& s : g.witness) {
            VertexId mab = mid.at(make_edge(s[0], s[1]));
            VertexId mbc = mid.at(make_edge(s[1], s[2]));
            VertexId mac = mid.at(make_edge(s[0], s[2]));
            out.add_simplex({s[0], mab, mac});
            out.add_simplex({s[1], mab, mbc});
            out.add_simplex({s[2], mbc, mac});
        }
    } else {
        std::set<std::vector<VertexId>> wset;
        for (auto s : g.witness) {
            std::sort(s.begin(), s.end());
            wset.insert(s);
        }
        for (const Facet& f : trace_facets(g, e)) {
            if (!f.outer && f.walk.size() == 3) {
                std::vector<VertexId> key = f.walk;
                std::sort(key.begin(), key.end());
                if (wset.count(key)) continue;
            }
            const auto& w = f.walk;
            const std::size_t n = w.size();
            for (std::size_t i = 0; i < n; ++i) {
                VertexId mp = mid.at(make_edge(w[(i + n - 1) % n], w[i]));
                VertexId mn = mid.at(make_edge(w[i], w[(i + 1) % n]));
                out.add_simplex({w[i], mp, mn});
            }
        }
    }
    out.boundary = g.boundary;
    return {out, eo};
}

struct RebalanceResult {
    Embedding emb;
    int iterations = 0;
    double max_displacement = 0.0;
};

/// Jacobi iteration moving each free vertex to the centroid of its
/// neighbors until displacements drop below tol.
inline RebalanceResult rebalance(const CostGraph& g, const Embedding& e,
                                 const std::set<VertexId>& free_vertices,
                                 int max_iters = 200, double tol = 1e-10) {
    for (VertexId v : free_vertices)
        if (g.neighbors(v).size() < 2)
            throw std::invalid_argument("rebalance: free vertex " +
                                        std::to_string(v) + " has < 2 neighbors");
    RebalanceResult res;
    res.emb = e;
    for (int it = 0; it < max_iters; ++it) {
        Embedding nxt = res.emb;
        double maxd = 0.0;
        for (VertexId v : free_vertices) {
            Vec3 c = Vec3::Zero();
            auto nb = g.neighbors(v);
            for (VertexId w : nb) c += res.emb.at(w);
            c /= static_cast<double>(nb.size());
            maxd = std::max(maxd, (c - res.emb.at(v)).norm());
            nxt.set(v, c);
        }
        res.emb = nxt;
        res.max_displacement = maxd;
        if (maxd < tol) break;
        ++res.iterations;
    }
    return res;
}

/// Midpoint refinement of a trivariate CoST: four corner tetrahedra replace
/// each tetrahedron; uncovered (added) edges pass through unchanged.
inline std::pair<CostGraph, Embedding> refine_3d(const CostGraph& g,
                                                 const Embedding& e) {
    if (g.dimension != 3)
        throw std::invalid_argument("refine_3d: trivariate structures only");
    ValidationReport vr = validate_cost(g);
    if (!vr.valid())
        throw std::invalid_argument("refine_3d: invalid input: " +
                                    vr.violations.front().message);

    std::set<EdgeKey> covered;
    for (const auto& s : g.witness)
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j)
                covered.insert(make_edge(s[i], s[j]));

    CostGraph out;
    out.dimension = 3;
    Embedding eo;
    for (VertexId v : g.vertices) {
        out.add_vertex(v);
        eo.set(v, e.at(v));
    }
    VertexId next = g.max_vertex_id() + 1;
    std::map<EdgeKey, VertexId> mid;
    for (const auto& ek : covered) {
        mid[ek] = next;
        out.add_vertex(next);
        eo.set(next, 0.5 * (e.at(ek.first) + e.at(ek.second)));
        ++next;
    }
    for (const auto& [ek, kind] : g.edges)
        if (!covered.count(ek)) out.add_edge(ek.first, ek.second, EdgeKind::Added);

    for (const auto& s : g.witness) {
        for (int i = 0; i < 4; ++i) {
            std::vector<VertexId> tet{s[i]};
            for (int j = 0; j < 4; ++j)
                if (j != i) tet.push_back(mid.at(make_edge(s[i], s[j])));
            out.add_simplex(tet);
        }
    }
    for (VertexId v : out.vertices)
        if (out.simplices_of(v).size() < 2) out.boundary.insert(v);

    if (g.layers) {
        // regroup by height; refined stacks gain two mid-planes per gap
        std::vector<std::pair<double, VertexId>> zs;
        for (VertexId v : out.vertices) zs.push_back({eo.at(v).z(), v});
        std::sort(zs.begin(), zs.end());
        double span = zs.empty() ? 0.0 : zs.back().first - zs.front().first;
        double eps = 1e-9 * std::max(span, 1.0);
        std::vector<std::vector<VertexId>> layers;
        for (std::size_t i = 0; i < zs.size(); ++i) {
            if (i == 0 || zs[i].first - zs[i - 1].first > eps)
                layers.push_back({});
            layers.back().push_back(zs[i].second);
        }
        out.layers = layers;
    }
    return {out, eo};
}

// ---------------------------------------------------------------------------
// Diagonal flips

struct FlipRecord {
    int u = 0, v = 0;  // removed triangulation edge
    int w = 0, x = 0;  // inserted triangulation edge, in the same numbering
    std::pair<int, int> simplices{-1, -1};  // affected witness indices
    VertexId mid = -1;  // CoST vertex on the flipped edge (stable across steps)
};

struct FlipLog {
    unsigned seed = 0;
    std::string process = "manual";
    std::vector<FlipRecord> flips;
};

/// Diagonal flip addressed by the triangulation edge (tu, tv), implemented
/// through the triangulation bijection. The CoST vertex sitting on the edge
/// keeps its id and moves to the midpoint of the inserted edge.
inline std::pair<CostGraph, Embedding> diagonal_flip(const CostGraph& g,
                                                     const Embedding& e, int tu,
                                                     int tv,
                                                     FlipLog* log = nullptr) {
    TriangulationMap tm = cost_to_triangulation(g, e);
    EdgeKey te = make_edge(tu, tv);
    auto it = tm.edge_to_cost.find(te);
    if (it == tm.edge_to_cost.end())
        throw std::invalid_argument("diagonal_flip: no triangulation edge (" +
                                    std::to_string(tu) + "," +
                                    std::to_string(tv) + ")");
    VertexId mid = it->second;
    auto affected = g.simplices_of(mid);
    EdgeKey ins = flip_triangulation_edge(tm.tri, tu, tv);

    std::map<EdgeKey, VertexId> ids = tm.edge_to_cost;
    ids.erase(te);
    ids[ins] = mid;
    auto [ng, unused] = triangulation_to_cost(tm.tri, &ids);
    (void)unused;
    Embedding ne;
    for (VertexId v : ng.vertices)
        ne.set(v, v == mid ? (0.5 * (tm.tri.positions.at(ins.first) +
                                     tm.tri.positions.at(ins.second)))
                               .eval()
                           : e.at(v));
    if (log)
        log->flips.push_back({tu, tv, ins.first, ins.second,
                              {affected.empty() ? -1 : affected[0],
                               affected.size() > 1 ? affected[1] : -1},
                              mid});
    return {ng, ne};
}

/// Direct local rewrite of the same flip; used as a differential check
/// against the bijection route.
inline std::pair<CostGraph, Embedding> diagonal_flip_local(const CostGraph& g,
                                                           const Embedding& e,
                                                           int tu, int tv) {
    TriangulationMap tm = cost_to_triangulation(g, e);
    EdgeKey te = make_edge(tu, tv);
    auto it = tm.edge_to_cost.find(te);
    if (it == tm.edge_to_cost.end())
        throw std::invalid_argument("diagonal_flip: no such triangulation edge");
    VertexId mid = it->second;
    auto ef = tm.tri.edge_faces();
    const auto& fs = ef.at(te);
    if (fs.size() != 2)
        throw std::invalid_argument("diagonal_flip: boundary edge");
    auto third = [&](int f) {
        for (int c : tm.tri.faces[f])
            if (c != tu && c != tv) return c;
        throw std::logic_error("degenerate face");
    };
    int w = third(fs[0]), x = third(fs[1]);
    if (tm.tri.has_edge(w, x))
        throw std::invalid_argument("diagonal_flip: cross edge already present");
    VertexId a = tm.edge_to_cost.at(make_edge(tu, w));
    VertexId b = tm.edge_to_cost.at(make_edge(tv, w));
    VertexId c = tm.edge_to_cost.at(make_edge(tu, x));
    VertexId d = tm.edge_to_cost.at(make_edge(tv, x));

    CostGraph ng = g;
    ng.remove_edge(a, b);
    ng.remove_edge(c, d);
    ng.add_edge(a, c);
    ng.add_edge(b, d);
    for (auto& s : ng.witness) {
        std::vector<VertexId> key = s;
        std::sort(key.begin(), key.end());
        std::vector<VertexId> t1{a, b, mid}, t2{c, d, mid};
        std::sort(t1.begin(), t1.end());
        std::sort(t2.begin(), t2.end());
        if (key == t1) s = {a, c, mid};
        else if (key == t2) s = {b, d, mid};
    }
    Embedding ne = e;
    ne.set(mid, 0.5 * (tm.tri.positions.at(w) + tm.tri.positions.at(x)));
    return {ng, ne};
}

/// True when the flip is combinatorially possible and the surrounding
/// quadrilateral is strictly convex in the embedding.
inline bool geometric_flip_admissible(const CostGraph& g, const Embedding& e,
                                      int tu, int tv, double tol = 1e-9) {
    TriangulationMap tm = cost_to_triangulation(g, e);
    EdgeKey te = make_edge(tu, tv);
    if (!tm.edge_to_cost.count(te)) return false;
    auto ef = tm.tri.edge_faces();
    const auto& fs = ef.at(te);
    if (fs.size() != 2) return false;
    auto third = [&](int f) {
        for (int c : tm.tri.faces[f])
            if (c != tu && c != tv) return c;
        return -1;
    };
    if (tm.tri.has_edge(third(fs[0]), third(fs[1]))) return false;
    return quad_strictly_convex(tm.tri, tu, tv, tol);
}

inline std::pair<CostGraph, Embedding> replay_flips(const CostGraph& g,
                                                    const Embedding& e,
                                                    const FlipLog& log) {
    CostGraph cg = g;
    Embedding ce = e;
    for (const auto& f : log.flips)
        std::tie(cg, ce) = diagonal_flip(cg, ce, f.u, f.v);
    return {cg, ce};
}

/// Undoes a log. Triangulation ids are renumbered per structure, so the
/// reverse addresses each flip through its stable CoST vertex instead of
/// the recorded (w, x) pair.
inline std::pair<CostGraph, Embedding> reverse_flips(const CostGraph& g,
                                                     const Embedding& e,
                                                     const FlipLog& log) {
    CostGraph cg = g;
    Embedding ce = e;
    for (auto it = log.flips.rbegin(); it != log.flips.rend(); ++it) {
        TriangulationMap tm = cost_to_triangulation(cg, ce);
        EdgeKey te = tm.cost_to_edge.at(it->mid);
        std::tie(cg, ce) = diagonal_flip(cg, ce, te.first, te.second);
    }
    return {cg, ce};
}

enum class FlipProcess { Poisson, Markov };

/// Seeded random flip sequence. Poisson picks uniformly over the admissible
/// interior edges; Markov weights them by exp(-distance to the previous
/// flip / lambda).
inline std::pair<CostGraph, Embedding> random_flips(const CostGraph& g,
                                                    const Embedding& e,
                                                    FlipProcess process,
                                                    int count, unsigned seed,
                                                    double lambda,
                                                    FlipLog* log = nullptr) {
    if (count < 0) throw std::invalid_argument("random_flips: count < 0");
    if (process == FlipProcess::Markov && lambda <= 0.0)
        throw std::invalid_argument("random_flips: lambda must be positive");
    std::mt19937 rng(seed);
    if (log) {
        log->seed = seed;
        log->process = process == FlipProcess::Poisson ? "poisson" : "markov";
    }
    CostGraph cg = g;
    Embedding ce = e;
    Vec3 last = Vec3::Zero();
    bool has_last = false;
    for (int step = 0; step < count; ++step) {
        TriangulationMap tm = cost_to_triangulation(cg, ce);
        auto ef = tm.tri.edge_faces();
        std::vector<std::pair<EdgeKey, Vec3>> cands;
        for (const auto& [te, v] : tm.edge_to_cost) {
            const auto& fs = ef.at(te);
            if (fs.size() != 2) continue;
            auto third = [&](int f) {
                for (int c : tm.tri.faces[f])
                    if (c != te.first && c != te.second) return c;
                return -1;
            };
            if (tm.tri.has_edge(third(fs[0]), third(fs[1]))) continue;
            if (!quad_strictly_convex(tm.tri, te.first, te.second)) continue;
            cands.push_back({te, ce.at(v)});
        }
        if (cands.empty())
            throw std::runtime_error("random_flips: no admissible flip");
        std::size_t pick = 0;
        if (process == FlipProcess::Poisson || !has_last) {
            pick = std::uniform_int_distribution<std::size_t>(
                0, cands.size() - 1)(rng);
        } else {
            std::vector<double> wts(cands.size());
            double total = 0.0;
            for (std::size_t i = 0; i < cands.size(); ++i) {
                wts[i] = std::exp(-(cands[i].second - last).norm() / lambda);
                total += wts[i];
            }
            double u = std::uniform_real_distribution<double>(0, total)(rng);
            double acc = 0.0;
            for (std::size_t i = 0; i < cands.size(); ++i) {
                acc += wts[i];
                if (u <= acc) {
                    pick = i;
                    break;
                }
            }
        }
        last = cands[pick].second;
        has_last = true;
        std::tie(cg, ce) = diagonal_flip(cg, ce, cands[pick].first.first,
                                         cands[pick].first.second, log);
    }
    return {cg, ce};
}

namespace editing_detail {

/// Proper crossing of open segments within a relative tolerance.
inline bool segments_cross(const Vec3& p0, const Vec3& p1, const Vec3& q0,
                           const Vec3& q1, double tol = 1e-9) {
    auto orient = [](const Vec3& a, const Vec3& b, const Vec3& c) {
        return (b.x() - a.x()) * (c.y() - a.y()) -
               (b.y() - a.y()) * (c.x() - a.x());
    };
    double scale = std::max((p1 - p0).norm(), (q1 - q0).norm());
    double eps = tol * scale * scale;
    double o1 = orient(p0, p1, q0), o2 = orient(p0, p1, q1);
    double o3 = orient(q0, q1, p0), o4 = orient(q0, q1, p1);
    return (o1 > eps && o2 < -eps && ((o3 > eps && o4 < -eps) ||
                                      (o3 < -eps && o4 > eps))) ||
           (o1 < -eps && o2 > eps && ((o3 > eps && o4 < -eps) ||
                                      (o3 < -eps && o4 > eps)));
}

}  // namespace editing_detail

/// Flips away every interior triangulation edge properly crossed by the
/// straight segment start + t * dir, t in [0, length], leaving an edge path
/// along the channel. Returns the flip count through the log.
inline std::pair<CostGraph, Embedding> carve_channel(const CostGraph& g,
                                                     const Embedding& e,
                                                     VertexId start,
                                                     const Vec3& direction,
                                                     double length,
                                                     FlipLog* log = nullptr) {
    if (length <= 0.0 || direction.norm() == 0.0)
        throw std::invalid_argument("carve_channel: bad segment");
    if (!e.pos.count(start))
        throw std::invalid_argument("carve_channel: unknown start vertex");
    Vec3 p0 = e.at(start);
    Vec3 p1 = p0 + length * direction.normalized();
    // every properly crossed interior edge gets flipped once, ordered along
    // the segment; edges are held by their cost vertex, the only id stable
    // across flips
    TriangulationMap tm = cost_to_triangulation(g, e);
    auto ef = tm.tri.edge_faces();
    std::vector<std::pair<double, VertexId>> hits;
    for (const auto& [te, v] : tm.edge_to_cost) {
        Vec3 qa = tm.tri.positions.at(te.first);
        Vec3 qb = tm.tri.positions.at(te.second);
        if (!editing_detail::segments_cross(p0, p1, qa, qb)) continue;
        if (ef.at(te).size() != 2)
            throw std::runtime_error("carve_channel: segment exits the patch");
        Vec3 d = p1 - p0, n(-(qb - qa).y(), (qb - qa).x(), 0.0);
        hits.push_back({(qa - p0).dot(n) / d.dot(n), v});
    }
    std::sort(hits.begin(), hits.end());
    CostGraph cg = g;
    Embedding ce = e;
    if (log) log->process = "channel";
    for (const auto& [t, v] : hits) {
        TriangulationMap cur = cost_to_triangulation(cg, ce);
        EdgeKey te = cur.cost_to_edge.at(v);
        std::tie(cg, ce) = diagonal_flip(cg, ce, te.first, te.second, log);
    }
    return {cg, ce};
}

// ---------------------------------------------------------------------------
// Trivariate flip

namespace editing_detail {

struct LayerView {
    CostGraph graph;                 // bivariate layer CoST
    Embedding emb;                   // flattened to z = 0
    std::map<std::vector<VertexId>, int> base_to_tet;  // sorted base -> witness
};

inline LayerView extract_layer(const CostGraph& g, const Embedding& e,
                               const std::vector<VertexId>& plane) {
    LayerView lv;
    lv.graph.dimension = 2;
    std::set<VertexId> in(plane.begin(), plane.end());
    for (VertexId v : plane) {
        lv.graph.add_vertex(v);
        Vec3 p = e.at(v);
        lv.emb.set(v, Vec3(p.x(), p.y(), 0.0));
    }
    for (const auto& [ek, kind] : g.edges)
        if (in.count(ek.first) && in.count(ek.second))
            lv.graph.add_edge(ek.first, ek.second);
    // tet bases lying in this plane
    std::set<EdgeKey> covered;
    for (int wi = 0; wi < static_cast<int>(g.witness.size()); ++wi) {
        std::vector<VertexId> base;
        for (VertexId v : g.witness[wi])
            if (in.count(v)) base.push_back(v);
        if (base.size() != 3) continue;
        std::sort(base.begin(), base.end());
        lv.graph.witness.push_back(base);
        lv.base_to_tet[base] = wi;
        covered.insert(make_edge(base[0], base[1]));
        covered.insert(make_edge(base[1], base[2]));
        covered.insert(make_edge(base[0], base[2]));
    }
    // uncovered in-plane edges close up into apex-free triangles
    std::set<std::vector<VertexId>> extra;
    for (const auto& [ek, kind] : lv.graph.edges) {
        if (covered.count(ek)) continue;
        for (VertexId w : lv.graph.neighbors(ek.first)) {
            if (w == ek.second || !lv.graph.has_edge(w, ek.second)) continue;
            if (covered.count(make_edge(ek.first, w)) ||
                covered.count(make_edge(ek.second, w)))
                continue;
            std::vector<VertexId> t{ek.first, ek.second, w};
            std::sort(t.begin(), t.end());
            extra.insert(t);
        }
    }
    for (const auto& t : extra) lv.graph.witness.push_back(t);
    for (VertexId v : plane)
        if (lv.graph.simplices_of(v).size() < 2) lv.graph.boundary.insert(v);
    return lv;
}

}  // namespace editing_detail

/// Diagonal flip inside Kagome plane layer_index of a foliated trivariate
/// CoST. Apexes of the two removed base triangles follow the new triangle
/// that keeps their first off-shared corner; apex positions move to the
/// mean of their six neighbors in the plane.
inline std::pair<CostGraph, Embedding> diagonal_flip_3d(const CostGraph& g,
                                                        const Embedding& e,
                                                        int layer_index, int tu,
                                                        int tv,
                                                        FlipLog* log = nullptr) {
    if (g.dimension != 3 || !g.layers)
        throw std::invalid_argument("diagonal_flip_3d: foliated trivariate "
                                    "CoST required");
    int plane_idx = 2 * layer_index;
    if (layer_index < 0 || plane_idx >= static_cast<int>(g.layers->size()))
        throw std::invalid_argument("diagonal_flip_3d: layer index out of range");
    auto lv = editing_detail::extract_layer(g, e, (*g.layers)[plane_idx]);

    TriangulationMap tm = cost_to_triangulation(lv.graph, lv.emb);
    EdgeKey te = make_edge(tu, tv);
    auto it = tm.edge_to_cost.find(te);
    if (it == tm.edge_to_cost.end())
        throw std::invalid_argument("diagonal_flip_3d: no such layer edge");
    VertexId mid = it->second;
    auto ef = tm.tri.edge_faces();
    const auto& fs = ef.at(te);
    if (fs.size() != 2)
        throw std::invalid_argument("diagonal_flip_3d: boundary edge");
    auto third = [&](int f) {
        for (int c : tm.tri.faces[f])
            if (c != tu && c != tv) return c;
        throw std::logic_error("degenerate face");
    };
    int w = third(fs[0]), x = third(fs[1]);
    if (tm.tri.has_edge(w, x))
        throw std::invalid_argument("diagonal_flip_3d: cross edge present");
    VertexId a = tm.edge_to_cost.at(make_edge(tu, w));
    VertexId b = tm.edge_to_cost.at(make_edge(tv, w));
    VertexId c = tm.edge_to_cost.at(make_edge(tu, x));
    VertexId d = tm.edge_to_cost.at(make_edge(tv, x));

    auto sorted3 = [](VertexId p, VertexId q, VertexId r) {
        std::vector<VertexId> t{p, q, r};
        std::sort(t.begin(), t.end());
        return t;
    };
    std::vector<VertexId> t1 = sorted3(mid, a, b), t2 = sorted3(mid, c, d);
    auto apex_of = [&](const std::vector<VertexId>& base) -> VertexId {
        auto bt = lv.base_to_tet.find(base);
        if (bt == lv.base_to_tet.end()) return -1;
        for (VertexId v : g.witness[bt->second])
            if (std::find(base.begin(), base.end(), v) == base.end()) return v;
        throw std::logic_error("tetrahedron without an apex");
    };
    // more than one tet per base means the local recoloring has no solution
    for (const auto& base : {t1, t2}) {
        int count = 0;
        for (int wi = 0; wi < static_cast<int>(g.witness.size()); ++wi) {
            std::vector<VertexId> bs;
            for (VertexId v : g.witness[wi])
                if (std::find(base.begin(), base.end(), v) != base.end())
                    bs.push_back(v);
            if (bs.size() == 3) ++count;
        }
        if (count > 1)
            throw std::runtime_error("diagonal_flip_3d: flip breaks local "
                                     "2-colorability (triangle carries two "
                                     "apexes)");
    }
    VertexId p1 = apex_of(t1), p2 = apex_of(t2);

    CostGraph ng = g;
    Embedding ne = e;
    ng.remove_edge(a, b);
    ng.remove_edge(c, d);
    // new base triangles: {mid,a,c} inherits t1's apex, {mid,b,d} t2's
    auto kind_for = [](VertexId apex) {
        return apex >= 0 ? EdgeKind::Witness : EdgeKind::Added;
    };
    ng.add_edge(a, c, kind_for(p1));
    ng.add_edge(b, d, kind_for(p2));
    ng.edges[make_edge(mid, a)] = kind_for(p1);
    ng.edges[make_edge(mid, c)] = kind_for(p1);
    ng.edges[make_edge(mid, b)] = kind_for(p2);
    ng.edges[make_edge(mid, d)] = kind_for(p2);
    if (p1 >= 0) {
        ng.remove_edge(p1, b);
        ng.add_edge(p1, c);
        int wi = lv.base_to_tet.at(t1);
        ng.witness[wi] = {mid, a, c, p1};
    }
    if (p2 >= 0) {
        ng.remove_edge(p2, c);
        ng.add_edge(p2, b);
        int wi = lv.base_to_tet.at(t2);
        ng.witness[wi] = {mid, b, d, p2};
    }
    for (VertexId apex : {p1, p2}) {
        if (apex < 0) continue;
        Vec3 m = Vec3::Zero();
        auto nb = ng.neighbors(apex);
        for (VertexId v : nb) m += ne.at(v);
        m /= static_cast<double>(nb.size());
        Vec3 p = ne.at(apex);
        ne.set(apex, Vec3(m.x(), m.y(), p.z()));
    }
    ng.coloring.reset();
    // open foliations carry known boundary-corner violations; only newly
    // introduced ones reject the flip
    std::set<std::string> before;
    for (const auto& v : validate_cost(g).violations) before.insert(v.message);
    for (const auto& v : validate_cost(ng).violations)
        if (!before.count(v.message))
            throw std::runtime_error("diagonal_flip_3d: result invalid: " +
                                     v.message);
    if (log) log->flips.push_back({tu, tv, w, x, {-1, -1}, mid});
    return {ng, ne};
}

// ---------------------------------------------------------------------------
// Joining

/// Merges two stiffened structures after dropping their stiffening data.
/// Each (a-vertex, b-vertex) pair collapses into the a-vertex, placed at the
/// midpoint of the two positions.
inline std::pair<CostGraph, Embedding> join(
    const StiffenedStructure& a, const StiffenedStructure& b,
    const std::vector<std::pair<VertexId, VertexId>>& pairing,
    const Embedding& ea, const Embedding& eb) {
    CostGraph ga = a.base, gb = b.base;
    for (const auto& ek : a.added_edges) ga.remove_edge(ek.first, ek.second);
    for (const auto& ek : b.added_edges) gb.remove_edge(ek.first, ek.second);

    auto deg2_boundary = [](const CostGraph& g) {
        int n = 0;
        for (VertexId v : g.boundary) n += g.degree(v) == 2;
        return n;
    };
    if (deg2_boundary(ga) != deg2_boundary(gb))
        throw std::invalid_argument("join: boundary vertex counts differ");

    std::set<VertexId> seen_a, seen_b;
    for (const auto& [u, v] : pairing) {
        if (!ga.boundary.count(u) || !gb.boundary.count(v))
            throw std::invalid_argument("join: pairing must match an a-boundary "
                                        "vertex with a b-boundary vertex");
        if (!seen_a.insert(u).second || !seen_b.insert(v).second)
            throw std::invalid_argument("join: pairing reuses a vertex");
    }

    const VertexId offset = ga.max_vertex_id() + 1;
    std::map<VertexId, VertexId> remap;
    for (const auto& [u, v] : pairing) remap[v] = u;
    auto mb = [&](VertexId v) {
        auto it = remap.find(v);
        return it != remap.end() ? it->second : v + offset;
    };

    CostGraph out = ga;
    Embedding eo;
    for (VertexId v : ga.vertices) eo.set(v, ea.at(v));
    for (VertexId v : gb.vertices) {
        VertexId nv = mb(v);
        out.add_vertex(nv);
        if (remap.count(v))
            eo.set(nv, 0.5 * (ea.at(remap.at(v)) + eb.at(v)));
        else
            eo.set(nv, eb.at(v));
    }
    for (const auto& [ek, kind] : gb.edges)
        out.add_edge(mb(ek.first), mb(ek.second), kind);
    for (const auto& s : gb.witness) {
        std::vector<VertexId> t;
        for (VertexId v : s) t.push_back(mb(v));
        out.witness.push_back(t);
    }
    out.boundary.clear();
    for (VertexId v : out.vertices)
        if (out.simplices_of(v).size() < 2) out.boundary.insert(v);
    out.coloring.reset();

    ValidationReport vr = validate_cost(out);
    if (!vr.valid())
        throw std::runtime_error("join: merged structure invalid: " +
                                 vr.violations.front().message);
    return {out, eo};
}

// ---------------------------------------------------------------------------
// Local re-realization

struct RerealizeResult {
    Embedding emb;
    int iterations = 0;
    double residual = 0.0;  // 2-norm of squared-length residuals
    bool converged = false;
    bool diverged = false;
};

/// Gauss-Newton on squared-length residuals over the region vertices only.
/// Divergence (residual growth over 10 consecutive steps) returns the best
/// iterate with the diverged flag set.
inline RerealizeResult rerealize_local(const CostGraph& g, const Embedding& e,
                                       const std::set<VertexId>& region,
                                       const std::map<EdgeKey, double>& targets,
                                       int max_iters = 100, double tol = 1e-10) {
    const int d = g.dimension;
    std::vector<VertexId> vars(region.begin(), region.end());
    std::map<VertexId, int> vidx;
    for (int i = 0; i < static_cast<int>(vars.size()); ++i) vidx[vars[i]] = i;
    std::vector<std::pair<EdgeKey, double>> cons;
    for (const auto& [ek, t] : targets) {
        if (!g.has_edge(ek.first, ek.second))
            throw std::invalid_argument("rerealize_local: target on missing edge");
        if (region.count(ek.first) || region.count(ek.second))
            cons.push_back({ek, t});
    }

    RerealizeResult res;
    res.emb = e;
    Embedding best = e;
    double best_norm = std::numeric_limits<double>::infinity();
    int grow_streak = 0;
    double prev_norm = std::numeric_limits<double>::infinity();

    for (int it = 0; it <= max_iters; ++it) {
        Eigen::VectorXd r(cons.size());
        double max_err = 0.0;
        for (std::size_t i = 0; i < cons.size(); ++i) {
            double len = res.emb.edge_length(cons[i].first.first,
                                             cons[i].first.second);
            r(i) = len * len - cons[i].second * cons[i].second;
            max_err = std::max(max_err, std::abs(len - cons[i].second));
        }
        double rn = r.norm();
        if (rn < best_norm) {
            best_norm = rn;
            best = res.emb;
        }
        res.residual = rn;
        if (max_err < tol) {
            res.converged = true;
            return res;
        }
        if (it == max_iters) break;
        if (rn > prev_norm) {
            if (++grow_streak >= 10) {
                res.diverged = true;
                res.emb = best;
                res.residual = best_norm;
                return res;
            }
        } else {
            grow_streak = 0;
        }
        prev_norm = rn;

        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(cons.size(), d * vars.size());
        for (std::size_t i = 0; i < cons.size(); ++i) {
            const auto& [ek, t] = cons[i];
            Vec3 dlt = res.emb.at(ek.first) - res.emb.at(ek.second);
            if (vidx.count(ek.first))
                for (int c = 0; c < d; ++c)
                    J(i, d * vidx[ek.first] + c) = 2.0 * dlt(c);
            if (vidx.count(ek.second))
                for (int c = 0; c < d; ++c)
                    J(i, d * vidx[ek.second] + c) = -2.0 * dlt(c);
        }
        Eigen::VectorXd dx = J.colPivHouseholderQr().solve(-r);
        for (std::size_t vi = 0; vi < vars.size(); ++vi) {
            Vec3 p = res.emb.at(vars[vi]);
            for (int c = 0; c < d; ++c) p(c) += dx(d * vi + c);
            res.emb.set(vars[vi], p);
        }
        ++res.iterations;
    }
    res.emb = best;
    res.residual = best_norm;
    return res;
}

}  // namespace cost

#endif  // COST_EDITING_HPP_
