#include <catch2/catch_amalgamated.hpp>

#include "cost/generators.hpp"
#include "cost/io.hpp"

using namespace cost;

TEST_CASE("document round trip") {
    SECTION("plain bivariate structure") {
        auto [g, e] = kagome_2d(2, 2, 1.0);
        g.coloring = two_color(g);
        std::string s = save_document(make_document(g, e));
        CostDocument d = load_document(s);
        REQUIRE(save_document(d) == s);
        REQUIRE(d.graph.vertices == g.vertices);
        REQUIRE(d.graph.edges == g.edges);
        REQUIRE(d.graph.witness == g.witness);
        REQUIRE(d.graph.boundary == g.boundary);
        REQUIRE(d.graph.coloring == g.coloring);
        for (VertexId v : g.vertices)
            REQUIRE((d.embedding.at(v) - e.at(v)).norm() == 0.0);
    }
    SECTION("stiffened structure with pins") {
        auto [g, e] = kagome_2d(2, 2, 1.0);
        auto st = stiffen(g, e, StiffenVariant::Pins);
        std::string s = save_document(make_document(st, e));
        CostDocument d = load_document(s);
        REQUIRE(save_document(d) == s);
        StiffenedStructure back = to_stiffened(d);
        REQUIRE(back.variant == StiffenVariant::Pins);
        REQUIRE(back.pins.size() == st.pins.size());
        REQUIRE(analyze_rigidity(back, d.embedding).dof == 0);
    }
    SECTION("sliders and added edges survive") {
        auto [g, e] = kagome_2d(2, 2, 1.0);
        auto st = stiffen(g, e, StiffenVariant::Sliders, 5);
        CostDocument d = load_document(save_document(make_document(st, e)));
        StiffenedStructure back = to_stiffened(d);
        REQUIRE(back.sliders.size() == st.sliders.size());
        for (const auto& [v, sl] : st.sliders) {
            REQUIRE((back.sliders.at(v).anchor - sl.anchor).norm() == 0.0);
            REQUIRE((back.sliders.at(v).direction - sl.direction).norm() == 0.0);
        }
        auto st2 = stiffen(g, e, StiffenVariant::Edges);
        CostDocument d2 = load_document(save_document(make_document(st2, e)));
        auto ae = to_stiffened(d2).added_edges;
        std::sort(ae.begin(), ae.end());
        auto expect = st2.added_edges;
        std::sort(expect.begin(), expect.end());
        REQUIRE(ae == expect);
    }
    SECTION("trivariate structure keeps its layers") {
        auto [g, e] = kagome_3d(2, 2, 2, 1.0);
        std::string s = save_document(make_document(g, e));
        CostDocument d = load_document(s);
        REQUIRE(save_document(d) == s);
        REQUIRE(d.graph.layers == g.layers);
        REQUIRE(d.graph.witness == g.witness);
    }
    SECTION("metadata lines persist verbatim") {
        auto [g, e] = kagome_2d(1, 1, 1.0);
        CostDocument d = make_document(g, e);
        d.meta = {"generator kagome2d rows=1 cols=1", "seed 42"};
        CostDocument back = load_document(save_document(d));
        REQUIRE(back.meta == d.meta);
    }
}

TEST_CASE("document errors") {
    auto [g, e] = kagome_2d(1, 1, 1.0);
    std::string good = save_document(make_document(g, e));
    SECTION("truncated input") {
        std::string cut = good.substr(0, good.size() / 2);
        REQUIRE_THROWS(load_document(cut));
        REQUIRE_THROWS_WITH(load_document("costdoc 1\ndimension 2\n"),
                            Catch::Matchers::ContainsSubstring("truncated"));
    }
    SECTION("unknown version") {
        REQUIRE_THROWS_WITH(load_document("costdoc 99\ndimension 2\nend\n"),
                            Catch::Matchers::ContainsSubstring("version"));
    }
    SECTION("dangling edge id is named") {
        std::string bad =
            "costdoc 1\ndimension 2\nvertex 0 0 0 0\nedge 0 7 witness\nend\n";
        REQUIRE_THROWS_WITH(load_document(bad),
                            Catch::Matchers::ContainsSubstring("missing vertex 7"));
    }
    SECTION("unknown record") {
        REQUIRE_THROWS(load_document("costdoc 1\ndimension 2\nwhatever\nend\n"));
    }
    SECTION("simplex arity must match dimension") {
        std::string bad =
            "costdoc 1\ndimension 3\nvertex 0 0 0 0\nvertex 1 1 0 0\n"
            "vertex 2 0 1 0\nsimplex 0 1 2\nend\n";
        REQUIRE_THROWS(load_document(bad));
    }
}

TEST_CASE("flip log text") {
    auto [g, e] = kagome_2d(3, 3, 1.0);
    FlipLog log;
    auto [fg, fe] = random_flips(g, e, FlipProcess::Poisson, 5, 99, 1.0, &log);
    std::string text = save_fliplog(log);
    REQUIRE(text.find("flip ") == 0);
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 5);
    FlipLog back = load_fliplog(text);
    REQUIRE(back.flips.size() == log.flips.size());
    for (std::size_t i = 0; i < log.flips.size(); ++i) {
        REQUIRE(back.flips[i].u == log.flips[i].u);
        REQUIRE(back.flips[i].v == log.flips[i].v);
    }
    // replaying the parsed log reproduces the flipped structure
    auto [rg, re] = replay_flips(g, e, back);
    REQUIRE(rg.edges == fg.edges);
    REQUIRE_THROWS(load_fliplog("flip 1 2 oops 3 4\n"));
}

TEST_CASE("obj export") {
    SECTION("bowtie wireframe") {
        auto [g, e] = kagome_2d(1, 1, 1.0);
        std::string obj = export_obj(g, e);
        std::istringstream in(obj);
        std::string line;
        int nv = 0, nl = 0;
        while (std::getline(in, line)) {
            if (line.rfind("v ", 0) == 0) ++nv;
            if (line.rfind("l ", 0) == 0) ++nl;
        }
        REQUIRE(nv == 5);
        REQUIRE(nl == 6);
    }
    SECTION("closed tube mesh has Euler characteristic 2") {
        Embedding e;
        CostGraph g;
        g.dimension = 3;
        g.add_vertex(0);
        g.add_vertex(1);
        g.add_edge(0, 1);
        e.set(0, Vec3(0, 0, 0));
        e.set(1, Vec3(2, 0, 0));
        std::string obj = export_obj(beam_surface(g, e, 0.1), 8);
        std::istringstream in(obj);
        std::string line;
        int V = 0, F = 0;
        std::set<std::pair<int, int>> edges;
        while (std::getline(in, line)) {
            if (line.rfind("v ", 0) == 0) ++V;
            if (line.rfind("f ", 0) == 0) {
                ++F;
                std::istringstream fs(line.substr(2));
                std::vector<int> idx;
                int i;
                while (fs >> i) idx.push_back(i);
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    int a = idx[k], b = idx[(k + 1) % idx.size()];
                    edges.insert({std::min(a, b), std::max(a, b)});
                }
            }
        }
        REQUIRE(V - static_cast<int>(edges.size()) + F == 2);
    }
    SECTION("empty inputs give empty files") {
        REQUIRE(export_obj(PatchSet{}).empty());
        REQUIRE(export_obj(LevelSet{}).empty());
    }
    SECTION("level set polylines as obj lines and plain text") {
        LevelSet ls;
        ls.polylines = {{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0)}};
        std::string obj = export_obj(ls);
        REQUIRE(obj.find("l 1 2 3") != std::string::npos);
        std::string txt = export_polylines(ls.polylines);
        REQUIRE(txt.rfind("polyline 3", 0) == 0);
    }
}

TEST_CASE("patch and matrix text exports") {
    SECTION("bezier blocks") {
        Embedding e;
        CostGraph g;
        g.dimension = 3;
        g.add_vertex(0);
        g.add_vertex(1);
        g.add_edge(0, 1);
        e.set(0, Vec3(0, 0, 0));
        e.set(1, Vec3(1, 0, 0));
        PatchSet ps = beam_surface(g, e, 0.1);
        std::string txt = export_bezier(ps);
        std::istringstream in(txt);
        std::string line;
        int blocks = 0, points = 0;
        while (std::getline(in, line)) {
            if (line == "patch") ++blocks;
            else ++points;
        }
        REQUIRE(blocks == static_cast<int>(ps.patches.size()));
        REQUIRE(points == 9 * blocks);
    }
    SECTION("csv and triplets") {
        Eigen::MatrixXd m(2, 3);
        m << 1, 0, 2, 0, 0, -3.5;
        REQUIRE(matrix_csv(m) == "1,0,2\n0,0,-3.5\n");
        REQUIRE(matrix_triplets(m) == "0 0 1\n0 2 2\n1 2 -3.5\n");
    }
}
