#ifndef COST_IO_HPP_
#define COST_IO_HPP_

#include "cost/continuum.hpp"
#include "cost/editing.hpp"

#include <cstdio>
#include <sstream>
#include <string>

namespace cost {

// ---------------------------------------------------------------------------
// CostDocument

/// On-disk unit: a structure, its embedding, optional grounding, and free
/// provenance lines. Added edges live in the graph with their Added tag.
struct CostDocument {
    int version = 1;
    CostGraph graph;
    Embedding embedding;
    std::optional<StiffenVariant> stiffening;
    std::map<VertexId, Vec3> pins;
    std::map<VertexId, SliderLine> sliders;
    std::vector<std::string> meta;
};

inline CostDocument make_document(const CostGraph& g, const Embedding& e) {
    CostDocument d;
    d.graph = g;
    d.embedding = e;
    return d;
}

inline CostDocument make_document(const StiffenedStructure& s, const Embedding& e) {
    CostDocument d;
    d.graph = s.base;
    d.embedding = e;
    d.stiffening = s.variant;
    d.pins = s.pins;
    d.sliders = s.sliders;
    return d;
}

inline StiffenedStructure to_stiffened(const CostDocument& d) {
    StiffenedStructure s;
    s.base = d.graph;
    s.variant = d.stiffening.value_or(StiffenVariant::Edges);
    for (const auto& [ek, kind] : d.graph.edges)
        if (kind == EdgeKind::Added) s.added_edges.push_back(ek);
    s.pins = d.pins;
    s.sliders = d.sliders;
    return s;
}

namespace io_detail {

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt(const Vec3& p) {
    return fmt(p.x()) + " " + fmt(p.y()) + " " + fmt(p.z());
}

struct Parser {
    std::istringstream in;
    std::string line;
    int lineno = 0;

    explicit Parser(const std::string& text) : in(text) {}

    bool next() {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw std::runtime_error("costdoc: line " + std::to_string(lineno) + ": " +
                                 what);
    }
};

}  // namespace io_detail

/// Canonical text form: vertices ascending, edges lexicographic, %.17g
/// coordinates; save(load(x)) reproduces x byte for byte.
inline std::string save_document(const CostDocument& d) {
    using io_detail::fmt;
    std::string out;
    out += "costdoc " + std::to_string(d.version) + "\n";
    out += "dimension " + std::to_string(d.graph.dimension) + "\n";
    for (VertexId v : d.graph.vertices) {
        out += "vertex " + std::to_string(v) + " " + fmt(d.embedding.at(v));
        if (d.graph.boundary.count(v)) out += " boundary";
        out += "\n";
    }
    for (const auto& [ek, kind] : d.graph.edges)
        out += "edge " + std::to_string(ek.first) + " " + std::to_string(ek.second) +
               (kind == EdgeKind::Witness ? " witness\n" : " added\n");
    for (const auto& s : d.graph.witness) {
        out += "simplex";
        for (VertexId v : s) out += " " + std::to_string(v);
        out += "\n";
    }
    if (d.graph.coloring)
        for (std::size_t i = 0; i < d.graph.coloring->size(); ++i)
            out += "color " + std::to_string(i) +
                   ((*d.graph.coloring)[i] == Color::Blue ? " blue\n" : " green\n");
    if (d.graph.layers)
        for (const auto& layer : *d.graph.layers) {
            out += "layer";
            for (VertexId v : layer) out += " " + std::to_string(v);
            out += "\n";
        }
    if (d.stiffening) {
        const char* names[] = {"edges", "pins", "sliders"};
        out += std::string("stiffening ") + names[static_cast<int>(*d.stiffening)] +
               "\n";
    }
    for (const auto& [v, p] : d.pins)
        out += "pin " + std::to_string(v) + " " + fmt(p) + "\n";
    for (const auto& [v, s] : d.sliders)
        out += "slider " + std::to_string(v) + " " + fmt(s.anchor) + " " +
               fmt(s.direction) + "\n";
    for (const auto& m : d.meta) out += "meta " + m + "\n";
    out += "end\n";
    return out;
}

inline CostDocument load_document(const std::string& text) {
    io_detail::Parser p(text);
    if (!p.next()) throw std::runtime_error("costdoc: empty input");
    {
        std::istringstream ls(p.line);
        std::string tag;
        int version = -1;
        ls >> tag >> version;
        if (tag != "costdoc") p.fail("expected 'costdoc <version>' header");
        if (version != 1)
            p.fail("unsupported version " + std::to_string(version) +
                   " (supported: 1)");
    }
    CostDocument d;
    bool have_dimension = false, ended = false;
    std::vector<Color> colors;
    std::vector<std::vector<VertexId>> layers;
    while (p.next()) {
        std::istringstream ls(p.line);
        std::string tag;
        ls >> tag;
        if (tag == "end") {
            ended = true;
            break;
        } else if (tag == "dimension") {
            if (!(ls >> d.graph.dimension)) p.fail("bad dimension");
            have_dimension = true;
        } else if (tag == "vertex") {
            VertexId v;
            double x, y, z;
            if (!(ls >> v >> x >> y >> z)) p.fail("bad vertex line");
            std::string flag;
            if (ls >> flag) {
                if (flag != "boundary") p.fail("unknown vertex flag '" + flag + "'");
                d.graph.boundary.insert(v);
            }
            d.graph.add_vertex(v);
            d.embedding.set(v, Vec3(x, y, z));
        } else if (tag == "edge") {
            VertexId u, v;
            std::string kind;
            if (!(ls >> u >> v >> kind)) p.fail("bad edge line");
            for (VertexId w : {u, v})
                if (!d.graph.has_vertex(w))
                    p.fail("edge references missing vertex " + std::to_string(w));
            if (kind == "witness")
                d.graph.add_edge(u, v, EdgeKind::Witness);
            else if (kind == "added")
                d.graph.add_edge(u, v, EdgeKind::Added);
            else
                p.fail("unknown edge kind '" + kind + "'");
        } else if (tag == "simplex") {
            std::vector<VertexId> s;
            VertexId v;
            while (ls >> v) {
                if (!d.graph.has_vertex(v))
                    p.fail("simplex references missing vertex " + std::to_string(v));
                s.push_back(v);
            }
            if (s.size() < 3) p.fail("simplex needs at least 3 vertices");
            d.graph.witness.push_back(s);
        } else if (tag == "color") {
            std::size_t idx;
            std::string c;
            if (!(ls >> idx >> c)) p.fail("bad color line");
            if (idx != colors.size()) p.fail("color indices must be consecutive");
            if (c == "blue")
                colors.push_back(Color::Blue);
            else if (c == "green")
                colors.push_back(Color::Green);
            else
                p.fail("unknown color '" + c + "'");
        } else if (tag == "layer") {
            std::vector<VertexId> layer;
            VertexId v;
            while (ls >> v) {
                if (!d.graph.has_vertex(v))
                    p.fail("layer references missing vertex " + std::to_string(v));
                layer.push_back(v);
            }
            layers.push_back(layer);
        } else if (tag == "stiffening") {
            std::string name;
            if (!(ls >> name)) p.fail("bad stiffening line");
            if (name == "edges")
                d.stiffening = StiffenVariant::Edges;
            else if (name == "pins")
                d.stiffening = StiffenVariant::Pins;
            else if (name == "sliders")
                d.stiffening = StiffenVariant::Sliders;
            else
                p.fail("unknown stiffening variant '" + name + "'");
        } else if (tag == "pin") {
            VertexId v;
            double x, y, z;
            if (!(ls >> v >> x >> y >> z)) p.fail("bad pin line");
            if (!d.graph.has_vertex(v))
                p.fail("pin references missing vertex " + std::to_string(v));
            d.pins[v] = Vec3(x, y, z);
        } else if (tag == "slider") {
            VertexId v;
            double ax, ay, az, dx, dy, dz;
            if (!(ls >> v >> ax >> ay >> az >> dx >> dy >> dz))
                p.fail("bad slider line");
            if (!d.graph.has_vertex(v))
                p.fail("slider references missing vertex " + std::to_string(v));
            d.sliders[v] = SliderLine{Vec3(ax, ay, az), Vec3(dx, dy, dz)};
        } else if (tag == "meta") {
            std::string rest = p.line.substr(std::min(p.line.size(), p.line.find(' ') + 1));
            d.meta.push_back(rest);
        } else {
            p.fail("unknown record '" + tag + "'");
        }
    }
    if (!ended) throw std::runtime_error("costdoc: truncated input (missing 'end')");
    if (!have_dimension) throw std::runtime_error("costdoc: missing dimension");
    for (const auto& s : d.graph.witness)
        if (s.size() != static_cast<std::size_t>(d.graph.dimension) + 1)
            throw std::runtime_error("costdoc: simplex arity does not match dimension");
    if (!colors.empty()) {
        if (colors.size() != d.graph.witness.size())
            throw std::runtime_error("costdoc: coloring size mismatch");
        d.graph.coloring = colors;
    }
    if (!layers.empty()) d.graph.layers = layers;
    return d;
}

// ---------------------------------------------------------------------------
// FlipLog text format

inline std::string save_fliplog(const FlipLog& log) {
    std::string out;
    for (const auto& f : log.flips)
        out += "flip " + std::to_string(f.u) + " " + std::to_string(f.v) + " -> " +
               std::to_string(f.w) + " " + std::to_string(f.x) + "\n";
    return out;
}

inline FlipLog load_fliplog(const std::string& text) {
    io_detail::Parser p(text);
    FlipLog log;
    log.process = "replay";
    while (p.next()) {
        if (p.line[0] == '#') continue;
        std::istringstream ls(p.line);
        std::string tag, arrow;
        FlipRecord r;
        if (!(ls >> tag >> r.u >> r.v >> arrow >> r.w >> r.x) || tag != "flip" ||
            arrow != "->")
            p.fail("expected 'flip <u> <v> -> <w> <x>'");
        log.flips.push_back(r);
    }
    return log;
}

// ---------------------------------------------------------------------------
// OBJ and friends

namespace io_detail {

/// Deduplicates vertices by quantized position; emits 1-based OBJ indices.
struct ObjWriter {
    std::string vlines;
    std::vector<std::string> flines;
    std::map<std::array<long long, 3>, int> index;
    int count = 0;

    int vertex(const Vec3& p, double tol = 1e-9) {
        std::array<long long, 3> key{std::llround(p.x() / tol),
                                     std::llround(p.y() / tol),
                                     std::llround(p.z() / tol)};
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        vlines += "v " + fmt(p.x()) + " " + fmt(p.y()) + " " + fmt(p.z()) + "\n";
        index[key] = ++count;
        return count;
    }
    std::string str() const {
        std::string out = vlines;
        for (const auto& f : flines) out += f;
        return out;
    }
};

}  // namespace io_detail

inline std::string export_obj(const CostGraph& g, const Embedding& e) {
    io_detail::ObjWriter w;
    std::map<VertexId, int> ids;
    for (VertexId v : g.vertices) ids[v] = w.vertex(e.at(v));
    for (const auto& [ek, kind] : g.edges)
        w.flines.push_back("l " + std::to_string(ids.at(ek.first)) + " " +
                           std::to_string(ids.at(ek.second)) + "\n");
    return w.str();
}

/// Samples each patch on an n x n quad grid, welding shared positions.
inline std::string export_obj(const PatchSet& ps, int n = 8) {
    if (n < 1) throw std::invalid_argument("export_obj: sampling density < 1");
    io_detail::ObjWriter w;
    for (const Patch& p : ps.patches)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double u0 = double(a) / n, u1 = double(a + 1) / n;
                double v0 = double(b) / n, v1 = double(b + 1) / n;
                int i00 = w.vertex(p.point(u0, v0));
                int i10 = w.vertex(p.point(u1, v0));
                int i11 = w.vertex(p.point(u1, v1));
                int i01 = w.vertex(p.point(u0, v1));
                std::set<int> uniq{i00, i10, i11, i01};
                if (uniq.size() < 3) continue;  // collapsed cap corner cells
                if (uniq.size() == 3) {
                    std::string f = "f";
                    int prev = -1;
                    for (int i : {i00, i10, i11, i01})
                        if (i != prev) {
                            f += " " + std::to_string(i);
                            prev = i;
                        }
                    w.flines.push_back(f + "\n");
                } else {
                    w.flines.push_back("f " + std::to_string(i00) + " " +
                                       std::to_string(i10) + " " +
                                       std::to_string(i11) + " " +
                                       std::to_string(i01) + "\n");
                }
            }
    return w.str();
}

inline std::string export_obj(const LevelSet& ls) {
    io_detail::ObjWriter w;
    for (const auto& t : ls.triangles) {
        int a = w.vertex(t[0]), b = w.vertex(t[1]), c = w.vertex(t[2]);
        if (a == b || b == c || a == c) continue;
        w.flines.push_back("f " + std::to_string(a) + " " + std::to_string(b) +
                           " " + std::to_string(c) + "\n");
    }
    for (const auto& poly : ls.polylines) {
        std::string l = "l";
        for (const Vec3& p : poly) l += " " + std::to_string(w.vertex(p));
        w.flines.push_back(l + "\n");
    }
    return w.str();
}

/// One patch per block, 9 control points row-major.
inline std::string export_bezier(const PatchSet& ps) {
    std::string out;
    for (const Patch& p : ps.patches) {
        out += "patch\n";
        for (const Vec3& c : p.ctrl) out += io_detail::fmt(c) + "\n";
    }
    return out;
}

inline std::string export_polylines(const std::vector<std::vector<Vec3>>& polys) {
    std::string out;
    for (const auto& poly : polys) {
        out += "polyline " + std::to_string(poly.size()) + "\n";
        for (const Vec3& p : poly) out += io_detail::fmt(p) + "\n";
    }
    return out;
}

inline std::string matrix_csv(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ",";
            out += io_detail::fmt(m(r, c));
        }
        out += "\n";
    }
    return out;
}

inline std::string matrix_triplets(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (m(r, c) != 0.0)
                out += std::to_string(r) + " " + std::to_string(c) + " " +
                       io_detail::fmt(m(r, c)) + "\n";
    return out;
}

}  // namespace cost

#endif  // COST_IO_HPP_
