// costtool: batch CLI chaining generation, editing, analysis and export of
// corner-sharing-triangle/tetrahedron structures. Every command is a pure
// function of its input files, flags and seed.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "cost/generators.hpp"
#include "cost/io.hpp"

using namespace cost;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

CostDocument read_doc(const std::string& path) {
    return load_document(read_file(path));
}

std::vector<double> parse_csv_numbers(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) out.push_back(std::stod(item));
    return out;
}

std::string fmt(double x) { return io_detail::fmt(x); }

struct Options {
    std::string output;
    unsigned seed = 0;
    double tol = 1e-10;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corner-sharing triangle/tetrahedron structure toolkit"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--output,-o", opt.output, "output file ('-' for stdout)");
    app.add_option("--seed", opt.seed, "seed for randomized operations");
    app.add_option("--tol", opt.tol, "numeric tolerance");
    app.fallthrough();

    // ---------------------------------------------------------------- generate
    auto* generate = app.add_subcommand("generate", "generate a lattice patch");
    generate->require_subcommand(1);
    int rows = 2, cols = 2, layers = 2;
    double edge_length = 1.0;
    std::string topology = "open";
    for (auto* sub : {generate->add_subcommand("kagome2d", "bivariate Kagome patch"),
                      generate->add_subcommand("kagome3d", "foliated trivariate Kagome")}) {
        sub->add_option("--rows", rows, "lattice rows")->required();
        sub->add_option("--cols", cols, "lattice columns")->required();
        sub->add_option("--edge-length", edge_length, "lattice edge length");
        sub->add_option("--topology", topology, "open|toroidal")
            ->check(CLI::IsMember({"open", "toroidal"}));
        if (sub->get_name() == "kagome3d")
            sub->add_option("--layers", layers, "stacked layers");
    }
    generate->callback([&] {
        Topology2d topo =
            topology == "toroidal" ? Topology2d::Toroidal : Topology2d::Open;
        CostDocument doc;
        if (generate->get_subcommands()[0]->get_name() == "kagome2d") {
            auto [g, e] = kagome_2d(rows, cols, edge_length, topo);
            g.coloring = two_color(g);
            doc = make_document(g, e);
            doc.meta.push_back("generate kagome2d rows=" + std::to_string(rows) +
                               " cols=" + std::to_string(cols) + " edge=" +
                               fmt(edge_length) + " topology=" + topology);
        } else {
            auto [g, e] = kagome_3d(rows, cols, layers, edge_length, topo);
            doc = make_document(g, e);
            doc.meta.push_back("generate kagome3d rows=" + std::to_string(rows) +
                               " cols=" + std::to_string(cols) + " layers=" +
                               std::to_string(layers) + " edge=" + fmt(edge_length) +
                               " topology=" + topology);
        }
        write_output(opt.output, save_document(doc));
    });

    // ------------------------------------------------------------------ refine
    auto* refine_cmd = app.add_subcommand("refine", "bivariate refinement");
    std::string refine_in, rule = "r0";
    int steps = 1;
    bool do_rebalance = false;
    refine_cmd->add_option("input", refine_in, "input document")->required();
    refine_cmd->add_option("--rule", rule, "r0|r1")
        ->check(CLI::IsMember({"r0", "r1"}));
    refine_cmd->add_option("--steps", steps, "refinement steps");
    refine_cmd->add_flag("--rebalance", do_rebalance, "recenter interior vertices");
    refine_cmd->callback([&] {
        CostDocument doc = read_doc(refine_in);
        CostGraph g = doc.graph;
        Embedding e = doc.embedding;
        for (int s = 0; s < steps; ++s) {
            std::tie(g, e) = refine(g, e, rule == "r0" ? RefineRule::R0 : RefineRule::R1);
            if (do_rebalance) {
                std::set<VertexId> free;
                for (VertexId v : g.vertices)
                    if (!g.boundary.count(v)) free.insert(v);
                e = rebalance(g, e, free, 200, opt.tol).emb;
            }
        }
        CostDocument out = make_document(g, e);
        out.meta = doc.meta;
        out.meta.push_back("refine rule=" + rule + " steps=" + std::to_string(steps) +
                           (do_rebalance ? " rebalance" : ""));
        write_output(opt.output, save_document(out));
    });

    auto* refine3d_cmd = app.add_subcommand("refine3d", "trivariate refinement");
    std::string refine3d_in;
    int steps3 = 1;
    refine3d_cmd->add_option("input", refine3d_in, "input document")->required();
    refine3d_cmd->add_option("--steps", steps3, "refinement steps");
    refine3d_cmd->callback([&] {
        CostDocument doc = read_doc(refine3d_in);
        CostGraph g = doc.graph;
        Embedding e = doc.embedding;
        for (int s = 0; s < steps3; ++s) std::tie(g, e) = refine_3d(g, e);
        CostDocument out = make_document(g, e);
        out.meta = doc.meta;
        out.meta.push_back("refine3d steps=" + std::to_string(steps3));
        write_output(opt.output, save_document(out));
    });

    // ----------------------------------------------------------------- stiffen
    auto* stiffen_cmd = app.add_subcommand("stiffen", "ground a bivariate patch");
    std::string stiffen_in, variant = "edges";
    stiffen_cmd->add_option("input", stiffen_in, "input document")->required();
    stiffen_cmd->add_option("--variant", variant, "edges|pins|sliders")
        ->check(CLI::IsMember({"edges", "pins", "sliders"}));
    stiffen_cmd->callback([&] {
        CostDocument doc = read_doc(stiffen_in);
        StiffenVariant v = variant == "edges"  ? StiffenVariant::Edges
                           : variant == "pins" ? StiffenVariant::Pins
                                               : StiffenVariant::Sliders;
        StiffenedStructure s = stiffen(doc.graph, doc.embedding, v, opt.seed);
        CostDocument out = make_document(s, doc.embedding);
        out.meta = doc.meta;
        out.meta.push_back("stiffen variant=" + variant +
                           " seed=" + std::to_string(opt.seed));
        write_output(opt.output, save_document(out));
    });

    auto* stiffen3d_cmd = app.add_subcommand("stiffen3d", "ground a trivariate patch");
    std::string stiffen3d_in;
    stiffen3d_cmd->add_option("input", stiffen3d_in, "input document")->required();
    stiffen3d_cmd->callback([&] {
        CostDocument doc = read_doc(stiffen3d_in);
        StiffenedStructure s = stiffen_3d(doc.graph, doc.embedding);
        CostDocument out = make_document(s, doc.embedding);
        out.meta = doc.meta;
        out.meta.push_back("stiffen3d");
        write_output(opt.output, save_document(out));
    });

    // -------------------------------------------------------------------- flip
    auto* flip_cmd = app.add_subcommand("flip", "diagonal flips");
    std::string flip_in, flip_edge, log_out;
    flip_cmd->add_option("input", flip_in, "input document")->required();
    flip_cmd->add_option("--edge", flip_edge,
                         "U,V: triangulation edge of the canonical bijection");
    flip_cmd->add_option("--log-out", log_out, "write the flip log here");

    auto* flip_random = flip_cmd->add_subcommand("random", "random flip process");
    std::string process = "poisson";
    int flip_count = 1;
    double lambda = 1.0;
    flip_random->add_option("--process", process, "poisson|markov")
        ->check(CLI::IsMember({"poisson", "markov"}));
    flip_random->add_option("--count", flip_count, "number of flips");
    flip_random->add_option("--lambda", lambda, "markov locality scale");

    auto* flip_channel = flip_cmd->add_subcommand("channel", "carve a channel");
    VertexId chan_start = 0;
    std::string chan_dir;
    double chan_length = 1.0;
    flip_channel->add_option("--start", chan_start, "start vertex id")->required();
    flip_channel->add_option("--dir", chan_dir, "DX,DY direction")->required();
    flip_channel->add_option("--length", chan_length, "channel length")->required();

    auto* flip_replay = flip_cmd->add_subcommand("replay", "replay a flip log");
    std::string replay_log;
    flip_replay->add_option("--log", replay_log, "flip log file")->required();

    flip_cmd->callback([&] {
        CostDocument doc = read_doc(flip_in);
        CostGraph g = doc.graph;
        Embedding e = doc.embedding;
        FlipLog log;
        log.seed = opt.seed;
        std::string what;
        if (flip_random->parsed()) {
            FlipProcess fp =
                process == "poisson" ? FlipProcess::Poisson : FlipProcess::Markov;
            std::tie(g, e) =
                random_flips(g, e, fp, flip_count, opt.seed, lambda, &log);
            what = "flip random process=" + process +
                   " count=" + std::to_string(flip_count) +
                   " seed=" + std::to_string(opt.seed);
        } else if (flip_channel->parsed()) {
            auto dir = parse_csv_numbers(chan_dir);
            if (dir.size() < 2 || dir.size() > 3)
                throw CLI::ValidationError("--dir", "expected DX,DY[,DZ]");
            Vec3 d(dir[0], dir[1], dir.size() > 2 ? dir[2] : 0.0);
            std::tie(g, e) = carve_channel(g, e, chan_start, d, chan_length, &log);
            what = "flip channel start=" + std::to_string(chan_start) + " dir=" +
                   chan_dir + " length=" + fmt(chan_length);
        } else if (flip_replay->parsed()) {
            FlipLog in_log = load_fliplog(read_file(replay_log));
            std::tie(g, e) = replay_flips(g, e, in_log);
            log = in_log;
            what = "flip replay count=" + std::to_string(in_log.flips.size());
        } else {
            if (flip_edge.empty())
                throw CLI::ValidationError("flip", "need --edge or a subcommand");
            auto uv = parse_csv_numbers(flip_edge);
            if (uv.size() != 2) throw CLI::ValidationError("--edge", "expected U,V");
            std::tie(g, e) = diagonal_flip(g, e, static_cast<int>(uv[0]),
                                           static_cast<int>(uv[1]), &log);
            what = "flip edge=" + flip_edge;
        }
        if (!log_out.empty()) write_output(log_out, save_fliplog(log));
        CostDocument out = make_document(g, e);
        out.meta = doc.meta;
        out.meta.push_back(what);
        write_output(opt.output, save_document(out));
    });

    // ----------------------------------------------------------------- analyze
    auto* analyze = app.add_subcommand("analyze", "structural analysis report");
    std::string analyze_in, analyze_what = "rigidity", mass_mode = "vertex";
    VertexId res_from = 0, res_to = 1;
    analyze->add_option("input", analyze_in, "input document")->required();
    analyze->add_option("what", analyze_what,
                        "rigidity|stress|flex|resistance|mass")
        ->check(CLI::IsMember({"rigidity", "stress", "flex", "resistance", "mass"}));
    analyze->add_option("--from", res_from, "resistance source vertex");
    analyze->add_option("--to", res_to, "resistance sink vertex");
    analyze->add_option("--mode", mass_mode, "vertex|edge|face")
        ->check(CLI::IsMember({"vertex", "edge", "face"}));
    analyze->callback([&] {
        CostDocument doc = read_doc(analyze_in);
        std::string out;
        auto report = [&]() {
            if (doc.stiffening)
                return analyze_rigidity(to_stiffened(doc), doc.embedding);
            return analyze_rigidity(doc.graph, doc.embedding);
        };
        if (analyze_what == "rigidity") {
            RigidityReport r = report();
            out += "vertices: " + std::to_string(doc.graph.vertices.size()) + "\n";
            out += "edges: " + std::to_string(doc.graph.edges.size()) + "\n";
            out += "rank: " + std::to_string(r.rank) + "\n";
            out += "dof: " + std::to_string(r.dof) + "\n";
            out += "stresses: " + std::to_string(r.stress_count) + "\n";
            out += "classification: " + r.classification + "\n";
            if (doc.graph.dimension == 2) {
                auto p = pebble_game(doc.graph, 2, 3);
                out += "pebble_free_dof: " + std::to_string(p.free_dof) + "\n";
                out += "pebble_independent: " +
                       std::string(p.independent ? "yes" : "no") + "\n";
                out += "pebble_minimally_rigid: " +
                       std::string(p.minimally_rigid ? "yes" : "no") + "\n";
            }
        } else if (analyze_what == "stress" || analyze_what == "flex") {
            RigidityReport r = report();
            const Eigen::MatrixXd& basis =
                analyze_what == "stress" ? r.stress_basis : r.flex_basis;
            out += analyze_what + "_dim: " + std::to_string(basis.cols()) + "\n";
            for (Eigen::Index c = 0; c < basis.cols(); ++c) {
                out += analyze_what + "_" + std::to_string(c) + ":";
                for (Eigen::Index i = 0; i < basis.rows(); ++i)
                    out += " " + fmt(basis(i, c));
                out += "\n";
            }
        } else if (analyze_what == "resistance") {
            double r = effective_resistance(doc.graph, {}, res_from, res_to);
            out += "from: " + std::to_string(res_from) + "\n";
            out += "to: " + std::to_string(res_to) + "\n";
            out += "resistance: " + fmt(r) + "\n";
        } else {
            MassMode m = mass_mode == "vertex" ? MassMode::Vertex
                         : mass_mode == "edge" ? MassMode::Edge
                                               : MassMode::Face;
            out += "mode: " + mass_mode + "\n";
            out += "mass: " + fmt(mass_measure(doc.graph, doc.embedding, m)) + "\n";
        }
        write_output(opt.output, out);
    });

    // -------------------------------------------------------------------- join
    auto* join_cmd = app.add_subcommand("join", "merge two stiffened structures");
    std::string join_a, join_b, pairs_file;
    join_cmd->add_option("a", join_a, "first document")->required();
    join_cmd->add_option("b", join_b, "second document")->required();
    join_cmd->add_option("--pairs", pairs_file, "file of 'u v' vertex pairs")
        ->required();
    join_cmd->callback([&] {
        CostDocument da = read_doc(join_a), db = read_doc(join_b);
        std::vector<std::pair<VertexId, VertexId>> pairing;
        std::istringstream in(read_file(pairs_file));
        VertexId u, v;
        while (in >> u >> v) pairing.push_back({u, v});
        auto [g, e] = join(to_stiffened(da), to_stiffened(db), pairing,
                           da.embedding, db.embedding);
        CostDocument out = make_document(g, e);
        out.meta.push_back("join pairs=" + std::to_string(pairing.size()));
        write_output(opt.output, save_document(out));
    });

    // --------------------------------------------------------------------- map
    auto* map_cmd = app.add_subcommand("map", "apply a domain map");
    std::string map_in, map_name = "identity", map_params;
    map_cmd->add_option("input", map_in, "input document")->required();
    map_cmd->add_option("--name", map_name, "identity|affine|sphere-octant")
        ->check(CLI::IsMember({"identity", "affine", "sphere-octant"}));
    map_cmd->add_option("--params", map_params,
                        "affine: 9 matrix entries + 3 offset, comma separated");
    map_cmd->callback([&] {
        CostDocument doc = read_doc(map_in);
        MapSpec spec;
        if (map_name == "affine") {
            spec.kind = MapSpec::Kind::Affine;
            auto p = parse_csv_numbers(map_params);
            if (p.size() != 12)
                throw CLI::ValidationError("--params", "affine needs 12 numbers");
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) spec.linear(r, c) = p[3 * r + c];
            spec.offset = Vec3(p[9], p[10], p[11]);
        } else if (map_name == "sphere-octant") {
            spec.kind = MapSpec::Kind::SphereOctant;
        }
        CostDocument out = doc;
        out.embedding = apply_map(doc.embedding, spec);
        out.meta.push_back("map name=" + map_name);
        write_output(opt.output, save_document(out));
    });

    // ------------------------------------------------------------------ export
    auto* export_cmd = app.add_subcommand("export", "geometry export");
    export_cmd->require_subcommand(1);
    std::string export_in;
    double thickness = 0.1, iso = 0.0;
    int bs_level = 3, bs_res = 1, obj_res = 8;
    std::string plane, beam_format = "obj";
    export_cmd->add_option("input", export_in, "input document")->required();

    export_cmd->add_subcommand("wireframe", "edges as OBJ lines");
    auto* exp_beams = export_cmd->add_subcommand("beams", "beam surfaces");
    exp_beams->add_option("--thickness", thickness, "beam half-width");
    exp_beams->add_option("--res", obj_res, "OBJ sampling density");
    exp_beams->add_option("--format", beam_format, "obj|bezier")
        ->check(CLI::IsMember({"obj", "bezier"}));
    auto* exp_level = export_cmd->add_subcommand("levelset", "box-spline level set");
    exp_level->add_option("--iso", iso, "iso value");
    exp_level->add_option("--level", bs_level, "subdivision level");
    exp_level->add_option("--res", bs_res, "sample stride");
    auto* exp_slice = export_cmd->add_subcommand("slice", "planar cross-section");
    exp_slice->add_option("--plane", plane, "PX,PY,PZ,NX,NY,NZ")->required();
    exp_slice->add_option("--thickness", thickness, "beam half-width");

    export_cmd->callback([&] {
        CostDocument doc = read_doc(export_in);
        const std::string sub = export_cmd->get_subcommands()[0]->get_name();
        if (sub == "wireframe") {
            write_output(opt.output, export_obj(doc.graph, doc.embedding));
        } else if (sub == "beams") {
            PatchSet ps = beam_surface(doc.graph, doc.embedding, thickness);
            write_output(opt.output, beam_format == "obj" ? export_obj(ps, obj_res)
                                                          : export_bezier(ps));
        } else if (sub == "levelset") {
            if (doc.graph.dimension != 2)
                throw CLI::ValidationError("levelset",
                                           "level-set export is bivariate only");
            // node sites +1 on the doubled lattice, empty sites -1
            Eigen::Matrix2d basis;
            basis << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
            Eigen::Matrix2d inv = basis.inverse();
            std::map<std::array<int, 3>, double> coeffs;
            std::set<std::array<int, 2>> nodes;
            int lo0 = 1 << 30, lo1 = 1 << 30, hi0 = -(1 << 30), hi1 = -(1 << 30);
            for (const auto& [v, p] : doc.embedding.pos) {
                Eigen::Vector2d q = inv * Eigen::Vector2d(p.x(), p.y()) * 2.0;
                int a = static_cast<int>(std::llround(q.x()));
                int b = static_cast<int>(std::llround(q.y()));
                if (std::abs(q.x() - a) > 1e-6 || std::abs(q.y() - b) > 1e-6)
                    throw CLI::ValidationError(
                        "levelset", "structure is not on the doubled lattice");
                nodes.insert({a, b});
                lo0 = std::min(lo0, a); hi0 = std::max(hi0, a);
                lo1 = std::min(lo1, b); hi1 = std::max(hi1, b);
            }
            for (int a = lo0; a <= hi0; ++a)
                for (int b = lo1; b <= hi1; ++b)
                    coeffs[{a, b, 0}] = nodes.count({a, b}) ? 1.0 : -1.0;
            SampleGrid grid = boxspline_eval(boxspline_field(2, coeffs), bs_level);
            if (bs_res > 1) {
                SampleGrid coarse = grid;
                coarse.shape = {(grid.shape[0] + bs_res - 1) / bs_res,
                                (grid.shape[1] + bs_res - 1) / bs_res, 1};
                coarse.values.clear();
                coarse.basis = grid.basis * bs_res;
                coarse.lo = {grid.lo[0] / bs_res, grid.lo[1] / bs_res, 0};
                for (int j = 0; j < grid.shape[1]; j += bs_res)
                    for (int i = 0; i < grid.shape[0]; i += bs_res)
                        coarse.values.push_back(grid.value(i, j));
                grid = coarse;
            }
            // the doubled lattice halves the spacing; undo it in the geometry
            grid.basis *= 0.5;
            LevelSet ls = level_set(grid, iso);
            write_output(opt.output, export_polylines(ls.polylines));
        } else {  // slice
            auto p = parse_csv_numbers(plane);
            if (p.size() != 6)
                throw CLI::ValidationError("--plane", "expected 6 numbers");
            PatchSet ps = beam_surface(doc.graph, doc.embedding, thickness);
            auto polys = slice_plane(ps, Vec3(p[0], p[1], p[2]),
                                     Vec3(p[3], p[4], p[5]),
                                     std::max(opt.tol, 1e-9));
            write_output(opt.output, export_polylines(polys));
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    } catch (const std::exception& err) {
        std::cerr << "costtool: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
