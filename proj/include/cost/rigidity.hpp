#ifndef COST_RIGIDITY_HPP_
#define COST_RIGIDITY_HPP_

#include "cost/core.hpp"

#include <Eigen/SVD>

namespace cost {

struct SparsityReport {
    bool independent = true;
    bool minimally_rigid = false;
    int free_dof = 0;
    std::vector<EdgeKey> redundant_edges;
    std::vector<std::set<VertexId>> rigid_components;
};

namespace pebble_detail {

/// Mutable pebble-game state: a directed graph where each vertex holds up to
/// k pebbles; inserting an edge consumes one after l+1 pebbles have been
/// gathered on its endpoints.
class PebbleState {
public:
    PebbleState(const std::vector<VertexId>& verts, int k) : k_(k) {
        int idx = 0;
        for (VertexId v : verts) index_[v] = idx++;
        pebbles_.assign(index_.size(), k);
        out_.resize(index_.size());
    }

    int pebbles(VertexId v) const { return pebbles_[index_.at(v)]; }

    /// Moves one pebble onto `target` by reversing a path from a vertex with
    /// a free pebble, keeping vertices in `keep` untouched.
    bool gather_one(int target, const std::set<int>& keep) {
        std::vector<int> parent(pebbles_.size(), -2);
        std::vector<int> stack{target};
        parent[target] = -1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            if (u != target && !keep.count(u) && pebbles_[u] > 0) {
                // reverse the path target -> ... -> u
                int cur = u;
                while (parent[cur] != -1) {
                    int prev = parent[cur];
                    auto it = std::find(out_[prev].begin(), out_[prev].end(), cur);
                    out_[prev].erase(it);
                    out_[cur].push_back(prev);
                    cur = prev;
                }
                --pebbles_[u];
                ++pebbles_[target];
                return true;
            }
            for (int w : out_[u])
                if (parent[w] == -2) {
                    parent[w] = u;
                    stack.push_back(w);
                }
        }
        return false;
    }

    /// Tries to gather `need` total pebbles on {u, v}.
    bool gather(VertexId uu, VertexId vv, int need) {
        int u = index_.at(uu), v = index_.at(vv);
        while (pebbles_[u] + pebbles_[v] < need) {
            if (!gather_one(u, {v})) {
                if (!gather_one(v, {u})) return false;
            }
        }
        return true;
    }

    void insert(VertexId uu, VertexId vv) {
        int u = index_.at(uu), v = index_.at(vv);
        if (pebbles_[u] == 0) std::swap(u, v);
        --pebbles_[u];
        out_[u].push_back(v);
    }

    /// Vertices reachable from {u, v} along directed edges.
    std::set<int> reach(VertexId uu, VertexId vv) const {
        std::set<int> seen{index_.at(uu), index_.at(vv)};
        std::vector<int> stack(seen.begin(), seen.end());
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (int w : out_[x])
                if (seen.insert(w).second) stack.push_back(w);
        }
        return seen;
    }

    VertexId id_of(int idx) const {
        for (const auto& [v, i] : index_)
            if (i == idx) return v;
        return -1;
    }

    const std::map<VertexId, int>& index() const { return index_; }
    const std::vector<std::vector<int>>& out() const { return out_; }
    const std::vector<int>& pebble_counts() const { return pebbles_; }

private:
    int k_;
    std::map<VertexId, int> index_;
    std::vector<int> pebbles_;
    std::vector<std::vector<int>> out_;
};

}  // namespace pebble_detail

/// (k,l)-pebble game over an edge list (parallel edges allowed). For d = 2
/// bar-joint graphs use (2,3). free_dof is reported for the connected case.
inline SparsityReport pebble_game(const std::vector<VertexId>& verts,
                                  const std::vector<EdgeKey>& edge_list, int k,
                                  int l) {
    if (k < 1 || l < 0 || l >= 2 * k)
        throw std::invalid_argument("pebble_game: need k >= 1 and 0 <= l < 2k");
    for (const auto& e : edge_list)
        if (e.first == e.second)
            throw std::invalid_argument("pebble_game: loop edge");

    pebble_detail::PebbleState st(verts, k);
    SparsityReport rep;
    int independent = 0;
    std::vector<std::set<int>> components;

    for (const auto& e : edge_list) {
        if (st.gather(e.first, e.second, l + 1)) {
            st.insert(e.first, e.second);
            ++independent;
            // component detection: exactly l pebbles left on the endpoints
            // and none reachable means the vertices with no directed path to
            // a free pebble form a tight block
            const int ui = st.index().at(e.first), vi = st.index().at(e.second);
            const auto& peb = st.pebble_counts();
            if (peb[ui] + peb[vi] == l) {
                std::set<int> reach = st.reach(e.first, e.second);
                bool free_in_reach = false;
                for (int w : reach)
                    if (w != ui && w != vi && peb[w] > 0) free_in_reach = true;
                if (!free_in_reach) {
                    const auto& out = st.out();
                    const int n = static_cast<int>(out.size());
                    std::vector<std::vector<int>> in(n);
                    for (int a = 0; a < n; ++a)
                        for (int b : out[a]) in[b].push_back(a);
                    std::vector<char> can(n, 0);
                    std::vector<int> stack;
                    for (int w = 0; w < n; ++w)
                        if (peb[w] > 0 && w != ui && w != vi) {
                            can[w] = 1;
                            stack.push_back(w);
                        }
                    while (!stack.empty()) {
                        int x = stack.back();
                        stack.pop_back();
                        for (int p : in[x])
                            if (!can[p]) {
                                can[p] = 1;
                                stack.push_back(p);
                            }
                    }
                    std::set<int> comp;
                    for (int w = 0; w < n; ++w)
                        if (!can[w]) comp.insert(w);
                    components.push_back(std::move(comp));
                }
            }
        } else {
            rep.independent = false;
            rep.redundant_edges.push_back(e);
        }
    }

    const int total = k * static_cast<int>(verts.size()) - l;
    rep.free_dof = total - independent;
    rep.minimally_rigid = rep.independent &&
                          static_cast<int>(edge_list.size()) == total;

    // keep only maximal components, translated back to vertex ids
    std::sort(components.begin(), components.end(),
              [](const auto& a, const auto& b) { return a.size() > b.size(); });
    std::vector<std::set<int>> maximal;
    for (const auto& c : components) {
        bool nested = false;
        for (const auto& m : maximal)
            if (std::includes(m.begin(), m.end(), c.begin(), c.end()))
                nested = true;
        if (!nested) maximal.push_back(c);
    }
    std::vector<VertexId> by_index(verts.size());
    for (const auto& [v, i] : st.index()) by_index[i] = v;
    for (const auto& c : maximal) {
        std::set<VertexId> s;
        for (int idx : c) s.insert(by_index[idx]);
        rep.rigid_components.push_back(std::move(s));
    }
    return rep;
}

inline SparsityReport pebble_game(const CostGraph& g, int k, int l) {
    std::vector<EdgeKey> edges;
    for (const auto& [e, kind] : g.edges) edges.push_back(e);
    return pebble_game(g.vertices, edges, k, l);
}

/// (6,6) pebble game on the body multigraph of a trivariate CoST: one body
/// per tetrahedron, three parallel bars per shared corner. A fast heuristic;
/// trivariate ground truth stays with the numeric rank.
inline SparsityReport pebble_game_body66(const CostGraph& g) {
    if (g.dimension != 3)
        throw std::invalid_argument("body multigraph requires a trivariate CoST");
    std::vector<VertexId> bodies;
    for (int i = 0; i < static_cast<int>(g.witness.size()); ++i) bodies.push_back(i);
    std::vector<EdgeKey> bars;
    for (VertexId v : g.vertices) {
        std::vector<int> s = g.simplices_of(v);
        if (s.size() == 2)
            for (int rep = 0; rep < 3; ++rep) bars.push_back(make_edge(s[0], s[1]));
    }
    return pebble_game(bodies, bars, 6, 6);
}

// ---------------------------------------------------------------------------
// Numeric rigidity

/// Column layout of rigidity-type matrices: d columns per vertex, vertices in
/// ascending id order.
inline std::map<VertexId, int> column_index(const CostGraph& g) {
    std::map<VertexId, int> idx;
    int i = 0;
    for (VertexId v : g.vertices) idx[v] = i++;
    return idx;
}

/// Halved Jacobian of the squared-distance system: one row per bar with
/// entries p(u)-p(v) in u's block. Pins add d unit rows, a slider one row
/// holding its line normal. Throws on a zero-length bar.
inline Eigen::MatrixXd rigidity_matrix(const CostGraph& g, const Embedding& e,
                                       const std::map<VertexId, Vec3>* pins = nullptr,
                                       const std::map<VertexId, SliderLine>* sliders = nullptr,
                                       bool unit_rows = false) {
    const int d = g.dimension;
    auto idx = column_index(g);
    const int cols = d * static_cast<int>(g.vertices.size());
    int rows = static_cast<int>(g.edges.size());
    if (pins) rows += d * static_cast<int>(pins->size());
    if (sliders) rows += static_cast<int>(sliders->size());

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);
    int r = 0;
    for (const auto& [edge, kind] : g.edges) {
        Vec3 diff = e.at(edge.first) - e.at(edge.second);
        if (diff.norm() <= 0.0)
            throw std::invalid_argument("rigidity_matrix: coincident endpoints on "
                                        "edge (" + std::to_string(edge.first) + "," +
                                        std::to_string(edge.second) + ")");
        if (unit_rows) diff.normalize();
        for (int c = 0; c < d; ++c) {
            M(r, d * idx[edge.first] + c) = diff[c];
            M(r, d * idx[edge.second] + c) = -diff[c];
        }
        ++r;
    }
    if (pins)
        for (const auto& [v, p] : *pins)
            for (int c = 0; c < d; ++c) M(r++, d * idx[v] + c) = 1.0;
    if (sliders)
        for (const auto& [v, line] : *sliders) {
            Vec3 n(-line.direction.y(), line.direction.x(), 0.0);
            for (int c = 0; c < d; ++c) M(r, d * idx[v] + c) = n[c];
            ++r;
        }
    return M;
}

inline Eigen::MatrixXd rigidity_matrix(const StiffenedStructure& s,
                                       const Embedding& e) {
    return rigidity_matrix(s.base, e, s.pins.empty() ? nullptr : &s.pins,
                           s.sliders.empty() ? nullptr : &s.sliders);
}

/// Basis of trivial infinitesimal motions (translations plus infinitesimal
/// rotations) for an ungrounded framework; empty for grounded systems.
inline Eigen::MatrixXd trivial_motions(const CostGraph& g, const Embedding& e,
                                       bool grounded = false) {
    const int d = g.dimension;
    const int n = static_cast<int>(g.vertices.size());
    if (grounded || n == 0) return Eigen::MatrixXd(d * n, 0);
    const int tdim = (n == 1) ? d : (d == 2 ? 3 : 6);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(d * n, tdim);
    auto idx = column_index(g);
    for (VertexId v : g.vertices) {
        const int b = d * idx[v];
        const Vec3 p = e.at(v);
        for (int c = 0; c < d; ++c) T(b + c, c) = 1.0;  // translations
        if (tdim > d) {
            if (d == 2) {
                T(b + 0, 2) = -p.y();
                T(b + 1, 2) = p.x();
            } else {
                // rotations about the three axes
                T(b + 1, 3) = -p.z(); T(b + 2, 3) = p.y();
                T(b + 0, 4) = p.z();  T(b + 2, 4) = -p.x();
                T(b + 0, 5) = -p.y(); T(b + 1, 5) = p.x();
            }
        }
    }
    // orthonormalize
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(T);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d * n, tdim);
    return Q;
}

struct RigidityReport {
    int rank = 0;
    int dof = 0;            // internal flexes beyond trivial motions
    int stress_count = 0;
    Eigen::MatrixXd flex_basis;    // columns
    Eigen::MatrixXd stress_basis;  // columns
    std::string classification;
};

/// Rank and nullspaces by SVD with threshold rel_tol * sigma_max. The trivial
/// motion subspace is projected out of the right nullspace.
inline RigidityReport numeric_rank(const Eigen::MatrixXd& M, double rel_tol = 1e-8,
                                   const Eigen::MatrixXd& trivial = Eigen::MatrixXd()) {
    RigidityReport rep;
    const int rows = static_cast<int>(M.rows());
    const int cols = static_cast<int>(M.cols());
    if (rows == 0 || cols == 0) {
        rep.dof = std::max(0, cols - static_cast<int>(trivial.cols()));
        rep.classification = rep.dof == 0 ? "minimally rigid" : "flexible";
        return rep;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double cutoff = rel_tol * svd.singularValues()(0);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > cutoff) ++rank;
    rep.rank = rank;

    Eigen::MatrixXd right_null = svd.matrixV().rightCols(cols - rank);
    if (trivial.cols() > 0) {
        // remove the trivial component, then re-extract an orthonormal basis
        Eigen::MatrixXd P = right_null - trivial * (trivial.transpose() * right_null);
        Eigen::JacobiSVD<Eigen::MatrixXd> psvd(P, Eigen::ComputeFullU);
        int prank = 0;
        for (int i = 0; i < psvd.singularValues().size(); ++i)
            if (psvd.singularValues()(i) > 1e-8) ++prank;
        rep.flex_basis = psvd.matrixU().leftCols(prank);
    } else {
        rep.flex_basis = right_null;
    }
    rep.dof = static_cast<int>(rep.flex_basis.cols());
    rep.stress_basis = svd.matrixU().rightCols(rows - rank);
    rep.stress_count = static_cast<int>(rep.stress_basis.cols());

    if (rep.dof == 0 && rep.stress_count == 0) rep.classification = "minimally rigid";
    else if (rep.dof > 0 && rep.stress_count == 0) rep.classification = "flexible";
    else if (rep.dof == 0) rep.classification = "overconstrained";
    else rep.classification = "flexible-and-overconstrained";
    return rep;
}

/// Convenience wrapper assembling the matrix and trivial motions.
inline RigidityReport analyze_rigidity(const CostGraph& g, const Embedding& e,
                                       double rel_tol = 1e-8) {
    return numeric_rank(rigidity_matrix(g, e), rel_tol, trivial_motions(g, e));
}

inline RigidityReport analyze_rigidity(const StiffenedStructure& s,
                                       const Embedding& e, double rel_tol = 1e-8) {
    const bool grounded = s.variant != StiffenVariant::Edges;
    return numeric_rank(rigidity_matrix(s, e), rel_tol,
                        trivial_motions(s.base, e, grounded));
}

/// K = R^T diag(c) R with unit bar directions; same nullspace as R.
inline Eigen::MatrixXd stiffness_matrix(const CostGraph& g, const Embedding& e,
                                        const std::map<EdgeKey, double>& spring) {
    Eigen::MatrixXd R = rigidity_matrix(g, e, nullptr, nullptr, /*unit_rows=*/true);
    Eigen::VectorXd c(R.rows());
    int r = 0;
    for (const auto& [edge, kind] : g.edges) {
        auto it = spring.find(edge);
        double k = it == spring.end() ? 1.0 : it->second;
        if (k <= 0.0)
            throw std::invalid_argument("stiffness_matrix: spring constants must "
                                        "be positive");
        c(r++) = k;
    }
    return R.transpose() * c.asDiagonal() * R;
}

/// Standard weighted graph Laplacian in vertex order.
inline Eigen::MatrixXd laplacian(const CostGraph& g,
                                 const std::map<EdgeKey, double>& weights) {
    auto idx = column_index(g);
    const int n = static_cast<int>(g.vertices.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [edge, kind] : g.edges) {
        auto it = weights.find(edge);
        double w = it == weights.end() ? 1.0 : it->second;
        if (w <= 0.0)
            throw std::invalid_argument("laplacian: weights must be positive");
        int a = idx[edge.first], b = idx[edge.second];
        L(a, a) += w;
        L(b, b) += w;
        L(a, b) -= w;
        L(b, a) -= w;
    }
    return L;
}

/// Effective electrical resistance between u and v, via a grounded solve.
inline double effective_resistance(const CostGraph& g,
                                   const std::map<EdgeKey, double>& weights,
                                   VertexId u, VertexId v) {
    auto idx = column_index(g);
    if (!idx.count(u) || !idx.count(v) || u == v)
        throw std::invalid_argument("effective_resistance: bad vertex pair");
    // connectivity check
    {
        std::set<VertexId> seen{u};
        std::vector<VertexId> stack{u};
        while (!stack.empty()) {
            VertexId x = stack.back();
            stack.pop_back();
            for (VertexId w : g.neighbors(x))
                if (seen.insert(w).second) stack.push_back(w);
        }
        if (!seen.count(v))
            throw std::invalid_argument("effective_resistance: vertices in "
                                        "different components");
    }
    Eigen::MatrixXd L = laplacian(g, weights);
    const int n = static_cast<int>(L.rows());
    const int gi = idx[v];
    // ground v: delete its row and column
    Eigen::MatrixXd Lg(n - 1, n - 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n - 1);
    auto reduced = [&](int i) { return i < gi ? i : i - 1; };
    for (int i = 0; i < n; ++i) {
        if (i == gi) continue;
        for (int j = 0; j < n; ++j) {
            if (j == gi) continue;
            Lg(reduced(i), reduced(j)) = L(i, j);
        }
    }
    rhs(reduced(idx[u])) = 1.0;
    Eigen::VectorXd x = Lg.ldlt().solve(rhs);
    return x(reduced(idx[u]));
}

/// Cross-sectional area A = l t / s realizing stress t on a bar of length l
/// at material stress s.
inline double bar_sizing(double stress, double length, double target_stress) {
    if (target_stress == 0.0)
        throw std::invalid_argument("bar_sizing: target stress must be nonzero");
    return length * stress / target_stress;
}

enum class MassMode { Vertex, Edge, Face };

/// Mass proxy over the witness set: vertices weighted by the inverse of
/// their simplex count, edge mode sums simplex bar lengths, face mode sums
/// triangle areas (d=2) or tetrahedron volumes (d=3).
inline double mass_measure(const CostGraph& g, const Embedding& e, MassMode mode) {
    double total = 0.0;
    switch (mode) {
        case MassMode::Vertex: {
            std::map<VertexId, int> cover;
            for (const auto& s : g.witness)
                for (VertexId v : s) ++cover[v];
            for (const auto& s : g.witness)
                for (VertexId v : s) total += 1.0 / cover[v];
            break;
        }
        case MassMode::Edge: {
            for (const auto& s : g.witness)
                for (std::size_t i = 0; i < s.size(); ++i)
                    for (std::size_t j = i + 1; j < s.size(); ++j)
                        total += e.edge_length(s[i], s[j]);
            break;
        }
        case MassMode::Face: {
            for (const auto& s : g.witness) {
                if (s.size() == 3) {
                    Vec3 a = e.at(s[1]) - e.at(s[0]);
                    Vec3 b = e.at(s[2]) - e.at(s[0]);
                    total += 0.5 * a.cross(b).norm();
                } else {
                    Vec3 a = e.at(s[1]) - e.at(s[0]);
                    Vec3 b = e.at(s[2]) - e.at(s[0]);
                    Vec3 c = e.at(s[3]) - e.at(s[0]);
                    total += std::abs(a.cross(b).dot(c)) / 6.0;
                }
            }
            break;
        }
    }
    return total;
}

}  // namespace cost

#endif  // COST_RIGIDITY_HPP_
