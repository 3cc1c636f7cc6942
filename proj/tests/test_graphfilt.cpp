#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "place/graphfilt.hpp"

using namespace place;

namespace {

Graph path3() { return {3, {{0, 1}, {1, 2}}}; }
Graph cycle4() { return {4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}}; }

Graph random_graph(std::mt19937_64& rng, std::size_t n, double p) {
    Graph g;
    g.n = n;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (u(rng) < p) g.edges.push_back({static_cast<int>(i), static_cast<int>(j)});
    return g;
}

std::size_t count_components(const Graph& g) {
    std::vector<int> parent(g.n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto [u, v] : g.edges) parent[find(u)] = find(v);
    std::size_t c = 0;
    for (std::size_t v = 0; v < g.n; ++v)
        if (find(static_cast<int>(v)) == static_cast<int>(v)) ++c;
    return c;
}

}  // namespace

TEST_CASE("descriptor_degree") {
    CHECK(descriptor_degree(path3()).values == std::vector<double>{1, 2, 1});
    CHECK(descriptor_degree(cycle4()).values == std::vector<double>{2, 2, 2, 2});
    Graph star{5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}};
    auto f = descriptor_degree(star);
    CHECK(f.values[0] == 4);
    for (int v = 1; v < 5; ++v) CHECK(f.values[v] == 1);
}

TEST_CASE("descriptor_hks") {
    SUBCASE("single vertex") {
        Graph g{1, {}};
        CHECK(descriptor_hks(g, 3.0).values[0] == doctest::Approx(1.0));
    }

    SUBCASE("K2 closed form") {
        Graph g{2, {{0, 1}}};
        for (double t : {0.5, 1.0, 10.0}) {
            auto f = descriptor_hks(g, t);
            const double want = 0.5 + 0.5 * std::exp(-2.0 * t);
            CHECK(f.values[0] == doctest::Approx(want).epsilon(1e-10));
            CHECK(f.values[1] == doctest::Approx(want).epsilon(1e-10));
        }
    }

    SUBCASE("vertex-transitive graph gives a constant signature") {
        auto f = descriptor_hks(cycle4(), 1.0);
        for (int v = 1; v < 4; ++v)
            CHECK(f.values[v] == doctest::Approx(f.values[0]).epsilon(1e-9));
    }

    SUBCASE("matches a dense eigensolver oracle on random graphs") {
        std::mt19937_64 rng(19);
        for (int trial = 0; trial < 10; ++trial) {
            auto g = random_graph(rng, 9, 0.35);
            Eigen::MatrixXd L = Eigen::MatrixXd::Zero(9, 9);
            for (auto [u, v] : g.edges) {
                L(u, v) -= 1;
                L(v, u) -= 1;
                L(u, u) += 1;
                L(v, v) += 1;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
            const double t = 0.8;
            Eigen::VectorXd want = Eigen::VectorXd::Zero(9);
            for (int i = 0; i < 9; ++i)
                want += std::exp(-t * es.eigenvalues()[i]) *
                        es.eigenvectors().col(i).cwiseAbs2();
            auto f = descriptor_hks(g, t);
            for (int v = 0; v < 9; ++v)
                CHECK(f.values[v] == doctest::Approx(want[v]).epsilon(1e-8));
        }
    }

    Graph too_big{600, {}};
    CHECK_THROWS_AS(descriptor_hks(too_big, 1.0), std::invalid_argument);
}

TEST_CASE("descriptor_closeness") {
    Graph k2{2, {{0, 1}}};
    CHECK(descriptor_closeness(k2).values == std::vector<double>{1.0, 1.0});

    auto f = descriptor_closeness(path3());
    CHECK(f.values[0] == doctest::Approx(1.0 / 3.0));
    CHECK(f.values[1] == doctest::Approx(0.5));
    CHECK(f.values[2] == doctest::Approx(1.0 / 3.0));

    Graph lonely{3, {{0, 1}}};
    CHECK(descriptor_closeness(lonely).values[2] == 0.0);
}

TEST_CASE("extended_persistence") {
    SUBCASE("P3 with valley function") {
        VertexFunction f{"f", {1, 2, 1}};
        auto [h0, h1] = extended_persistence(path3(), f);
        REQUIRE(h0.size() == 2);  // one ordinary merge bar + one essential bar
        CHECK(h1.empty());
        // both bars are (1, 2)
        for (const auto& p : h0.points) {
            CHECK(p.birth == 1);
            CHECK(p.death == 2);
        }
    }

    SUBCASE("constant function on a cycle drops everything") {
        VertexFunction f{"f", {3, 3, 3, 3}};
        auto [h0, h1] = extended_persistence(cycle4(), f);
        CHECK(h0.empty());
        CHECK(h1.empty());
    }

    SUBCASE("two disjoint edges") {
        Graph g{4, {{0, 1}, {2, 3}}};
        VertexFunction f{"f", {1, 2, 5, 7}};
        auto [h0, h1] = extended_persistence(g, f);
        REQUIRE(h0.size() == 2);  // essential bar per component, no ordinary merges
        CHECK(h1.empty());
        CHECK(h0.points[0].birth == 1);
        CHECK(h0.points[0].death == 2);
        CHECK(h0.points[1].birth == 5);
        CHECK(h0.points[1].death == 7);
    }

    SUBCASE("cycle bar dies at the component max") {
        // triangle plus a pendant vertex carrying the component maximum
        Graph g{4, {{0, 1}, {1, 2}, {0, 2}, {0, 3}}};
        VertexFunction f{"f", {1, 2, 3, 9}};
        auto [h0, h1] = extended_persistence(g, f);
        REQUIRE(h1.size() == 1);
        CHECK(h1.points[0].birth == 3);  // cycle-closing edge value
        CHECK(h1.points[0].death == 9);  // max f on the component
    }

    SUBCASE("cycle closing at the component max is dropped as degenerate") {
        VertexFunction f{"f", {1, 2, 3, 4}};
        auto [h0, h1] = extended_persistence(cycle4(), f);
        CHECK(h1.empty());
    }
}

TEST_CASE("extended_persistence bar counts") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int trial = 0; trial < 30; ++trial) {
        // connected random graph with a pendant carrying the strict maximum,
        // so no cycle or essential bar can degenerate
        auto g = random_graph(rng, 7, 0.35);
        for (int v = 0; v + 1 < 7; ++v)
            if (std::find(g.edges.begin(), g.edges.end(), std::make_pair(v, v + 1)) ==
                g.edges.end())
                g.edges.push_back({v, v + 1});
        g.n = 8;
        g.edges.push_back({0, 7});
        VertexFunction f{"f", {}};
        for (int v = 0; v < 7; ++v) f.values.push_back(u(rng));
        f.values.push_back(10.0);  // pendant maximum

        auto [h0, h1] = extended_persistence(g, f);
        REQUIRE(count_components(g) == 1);
        // cycle rank of a connected graph, with every cycle bar alive
        CHECK(h1.size() == g.edges.size() - g.n + 1);
        // exactly one essential bar (comp min, 10)
        std::size_t essential = 0;
        for (const auto& p : h0.points)
            if (p.death == 10.0) ++essential;
        CHECK(essential == 1);
        // every bar is strictly positive
        for (const auto& p : h0.points) CHECK(p.death > p.birth);
        for (const auto& p : h1.points) CHECK(p.death > p.birth);
    }
}

TEST_CASE("monotone relabeling equivariance") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = random_graph(rng, 7, 0.4);
        VertexFunction f{"f", {}};
        for (std::size_t v = 0; v < g.n; ++v) f.values.push_back(u(rng));
        auto mapv = [](double x) { return 2.0 * x * x * x + 5.0 * x + 1.0; };  // strictly increasing on [0,5]
        VertexFunction fg{"g", {}};
        for (double x : f.values) fg.values.push_back(mapv(x));

        auto [h0a, h1a] = extended_persistence(g, f);
        auto [h0b, h1b] = extended_persistence(g, fg);
        REQUIRE(h0a.size() == h0b.size());
        REQUIRE(h1a.size() == h1b.size());
        for (std::size_t i = 0; i < h0a.size(); ++i) {
            CHECK(h0b.points[i].birth == doctest::Approx(mapv(h0a.points[i].birth)));
            CHECK(h0b.points[i].death == doctest::Approx(mapv(h0a.points[i].death)));
        }
        for (std::size_t i = 0; i < h1a.size(); ++i) {
            CHECK(h1b.points[i].birth == doctest::Approx(mapv(h1a.points[i].birth)));
            CHECK(h1b.points[i].death == doctest::Approx(mapv(h1a.points[i].death)));
        }
    }
}

TEST_CASE("sublevel component counts match a brute-force threshold oracle") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int trial = 0; trial < 25; ++trial) {
        auto g = random_graph(rng, 8, 0.35);
        VertexFunction f{"f", {}};
        for (std::size_t v = 0; v < g.n; ++v) f.values.push_back(u(rng));
        auto [h0, h1] = extended_persistence(g, f);

        // classify bars: essential bars never die in the sublevel filtration
        std::vector<std::pair<double, double>> ordinary;  // (birth, death at merge)
        std::vector<double> essential_births;
        {
            // recompute essential bars independently per component via BFS
            std::vector<int> comp(g.n, -1);
            std::vector<std::vector<int>> adj(g.n);
            for (auto [a, b] : g.edges) {
                adj[a].push_back(b);
                adj[b].push_back(a);
            }
            int nc = 0;
            for (std::size_t s = 0; s < g.n; ++s) {
                if (comp[s] >= 0) continue;
                std::queue<int> q;
                q.push(static_cast<int>(s));
                comp[s] = nc;
                double mn = f.values[s];
                while (!q.empty()) {
                    int v = q.front();
                    q.pop();
                    mn = std::min(mn, f.values[v]);
                    for (int w : adj[v])
                        if (comp[w] < 0) {
                            comp[w] = nc;
                            q.push(static_cast<int>(w));
                        }
                }
                essential_births.push_back(mn);
                ++nc;
            }
            // ordinary = h0 minus the essential multiset (essential death = comp max)
            std::vector<DiagramPoint> rest = h0.points;
            for (std::size_t s = 0; s < essential_births.size(); ++s) {
                // find the essential bar: birth = component min, death = comp max
                double mx = -1e300;
                for (std::size_t v = 0; v < g.n; ++v)
                    if (comp[v] == static_cast<int>(s)) mx = std::max(mx, f.values[v]);
                for (auto it = rest.begin(); it != rest.end(); ++it)
                    if (it->birth == essential_births[s] && it->death == mx) {
                        rest.erase(it);
                        break;
                    }
            }
            for (const auto& p : rest) ordinary.push_back({p.birth, p.death});
        }

        // at every threshold t, alive bars == components of the sublevel graph
        std::vector<double> thresholds = f.values;
        for (const auto& [a, b] : g.edges)
            thresholds.push_back(std::max(f.values[a], f.values[b]));
        for (double t : thresholds) {
            std::size_t alive = 0;
            for (const auto& [birth, death] : ordinary)
                if (birth <= t && t < death) ++alive;
            for (double b : essential_births)
                if (b <= t) ++alive;
            // brute-force sublevel component count
            std::vector<int> idx(g.n, -1);
            std::vector<std::size_t> verts;
            for (std::size_t v = 0; v < g.n; ++v)
                if (f.values[v] <= t) {
                    idx[v] = static_cast<int>(verts.size());
                    verts.push_back(v);
                }
            Graph sub;
            sub.n = verts.size();
            for (auto [a, b] : g.edges)
                if (idx[a] >= 0 && idx[b] >= 0 &&
                    std::max(f.values[a], f.values[b]) <= t)
                    sub.edges.push_back({idx[a], idx[b]});
            CHECK(alive == count_components(sub));
        }
    }
}

TEST_CASE("pool_descriptors") {
    PersistenceDiagram a;
    a.points = {{0, 3}, {1, 2}};
    CHECK(pool_descriptors({a}, 50).size() == 2);

    PersistenceDiagram b;
    for (int i = 0; i < 30; ++i) {
        a.points.push_back({0.0, 1.0 + i * 0.01});
        b.points.push_back({0.0, 2.0 + i * 0.01});
    }
    auto pooled = pool_descriptors({a, b}, 50);
    CHECK(pooled.size() == 50);

    PersistenceDiagram empty;
    auto same = pool_descriptors({a, empty}, 100);
    CHECK(same.size() == a.size());
}

TEST_CASE("load_tu_dataset") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "place_tu_fixture";
    fs::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name);
        out << content;
    };

    SUBCASE("two triangles") {
        write("FIX_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n5, 6\n6, 5\n4, 6\n6, 4\n");
        write("FIX_graph_indicator.txt", "1\n1\n1\n2\n2\n2\n");
        write("FIX_graph_labels.txt", "1\n2\n");
        auto ds = load_tu_dataset(dir.string());
        REQUIRE(ds.graphs.size() == 2);
        CHECK(ds.graphs[0].n == 3);
        CHECK(ds.graphs[0].edges.size() == 3);
        CHECK(ds.graphs[1].edges.size() == 3);
        CHECK(ds.labels == std::vector<int>{0, 1});
    }

    SUBCASE("missing indicator file") {
        const fs::path dir2 = fs::temp_directory_path() / "place_tu_missing";
        fs::create_directories(dir2);
        std::ofstream(dir2 / "FIX_A.txt") << "1, 2\n";
        std::ofstream(dir2 / "FIX_graph_labels.txt") << "1\n";
        CHECK_THROWS_WITH_AS(load_tu_dataset(dir2.string()),
                             doctest::Contains("_graph_indicator"), std::runtime_error);
        fs::remove_all(dir2);
    }

    SUBCASE("malformed edge row carries a line number") {
        write("FIX_A.txt", "1, 2\nbogus\n");
        write("FIX_graph_indicator.txt", "1\n1\n");
        write("FIX_graph_labels.txt", "1\n");
        CHECK_THROWS_WITH_AS(load_tu_dataset(dir.string()), doctest::Contains(":2"),
                             std::runtime_error);
    }

    SUBCASE("cross-graph edge rejected") {
        write("FIX_A.txt", "1, 2\n");
        write("FIX_graph_indicator.txt", "1\n2\n");
        write("FIX_graph_labels.txt", "1\n2\n");
        CHECK_THROWS_WITH_AS(load_tu_dataset(dir.string()),
                             doctest::Contains("different graphs"), std::runtime_error);
    }

    fs::remove_all(dir);
}

TEST_CASE("load_vertex_function_table") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "place_vf_fixture";
    fs::create_directories(dir);
    std::ofstream(dir / "FIX_A.txt") << "1, 2\n2, 1\n";
    std::ofstream(dir / "FIX_graph_indicator.txt") << "1\n1\n2\n";
    std::ofstream(dir / "FIX_graph_labels.txt") << "1\n2\n";
    auto ds = load_tu_dataset((dir).string());

    std::ofstream(dir / "values.txt") << "0.5\n1.5\n2.5\n";
    auto fns = load_vertex_function_table((dir / "values.txt").string(), ds, "user");
    REQUIRE(fns.size() == 2);
    CHECK(fns[0].values == std::vector<double>{0.5, 1.5});
    CHECK(fns[1].values == std::vector<double>{2.5});

    std::ofstream(dir / "short.txt") << "0.5\n";
    CHECK_THROWS_AS(load_vertex_function_table((dir / "short.txt").string(), ds, "user"),
                    std::runtime_error);
    fs::remove_all(dir);
}
