#pragma once

// Labeled graphs to extended-persistence diagrams under vertex descriptors
// (degree, heat-kernel signature, closeness, user-supplied), plus the
// TU-format dataset reader.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "place/diagram.hpp"

namespace place {

struct Graph {
    std::size_t n = 0;
    std::vector<std::pair<int, int>> edges;  // u < v, deduplicated, no self-loops
};

struct VertexFunction {
    std::string descriptor_name;
    std::vector<double> values;
};

inline void validate_graph(const Graph& g) {
    for (const auto& [u, v] : g.edges) {
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= g.n ||
            static_cast<std::size_t>(v) >= g.n)
            throw std::invalid_argument("graph: edge endpoint out of range");
        if (u == v) throw std::invalid_argument("graph: self-loop");
    }
}

inline VertexFunction descriptor_degree(const Graph& g) {
    validate_graph(g);
    VertexFunction f;
    f.descriptor_name = "degree";
    f.values.assign(g.n, 0.0);
    for (const auto& [u, v] : g.edges) {
        f.values[u] += 1.0;
        f.values[v] += 1.0;
    }
    return f;
}

namespace detail {

// Cyclic Jacobi eigendecomposition for a symmetric matrix held as a dense
// row-major vector. Returns eigenvalues; eigenvectors land in V (columns).
// Sweeps until the off-diagonal Frobenius norm drops below 1e-10 ||A||,
// capped at 100 sweeps.
inline std::vector<double> jacobi_eigen(std::vector<double> a, std::size_t n,
                                        std::vector<double>& V) {
    V.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) V[i * n + i] = 1.0;
    double total = 0.0;
    for (double x : a) total += x * x;
    const double target = 1e-10 * std::sqrt(total);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a[p * n + q] * a[p * n + q];
        if (std::sqrt(off) < target) break;

        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p], aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i * n + p], aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p * n + i], aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = V[i * n + p], viq = V[i * n + q];
                    V[i * n + p] = c * vip - s * viq;
                    V[i * n + q] = s * vip + c * viq;
                }
            }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
    return eig;
}

}  // namespace detail

inline constexpr std::size_t kHksMaxVertices = 512;

/// Heat-kernel signature at diffusion time t: h_t(v) = sum_i e^{-t l_i} phi_i(v)^2
/// with (l_i, phi_i) the eigenpairs of the unnormalized graph Laplacian.
inline VertexFunction descriptor_hks(const Graph& g, double t) {
    validate_graph(g);
    if (g.n > kHksMaxVertices)
        throw std::invalid_argument("descriptor_hks: graph exceeds the dense eigensolver guard");
    VertexFunction f;
    f.descriptor_name = "hks_t" + std::to_string(t);
    f.values.assign(g.n, 0.0);
    if (g.n == 0) return f;

    std::vector<double> lap(g.n * g.n, 0.0);
    for (const auto& [u, v] : g.edges) {
        lap[u * g.n + v] -= 1.0;
        lap[v * g.n + u] -= 1.0;
        lap[u * g.n + u] += 1.0;
        lap[v * g.n + v] += 1.0;
    }
    std::vector<double> V;
    const auto eig = detail::jacobi_eigen(std::move(lap), g.n, V);
    for (std::size_t v = 0; v < g.n; ++v) {
        double h = 0.0;
        for (std::size_t i = 0; i < g.n; ++i) {
            const double phi = V[v * g.n + i];
            h += std::exp(-t * eig[i]) * phi * phi;
        }
        f.values[v] = h;
    }
    return f;
}

/// Per-component closeness: 1 / sum of hop distances to the other vertices
/// of the component; isolated vertices get 0.
inline VertexFunction descriptor_closeness(const Graph& g) {
    validate_graph(g);
    VertexFunction f;
    f.descriptor_name = "closeness";
    f.values.assign(g.n, 0.0);
    std::vector<std::vector<int>> adj(g.n);
    for (const auto& [u, v] : g.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<int> dist(g.n);
    for (std::size_t s = 0; s < g.n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        std::queue<int> q;
        q.push(static_cast<int>(s));
        long long total = 0;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            total += dist[u];
            for (int v : adj[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
        }
        f.values[s] = total > 0 ? 1.0 / static_cast<double>(total) : 0.0;
    }
    return f;
}

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
};

}  // namespace detail

/// Sublevel extended persistence of a vertex function on a graph. Edges
/// carry f(u,v) = max(f(u), f(v)). Ordinary H0 bars follow the elder rule
/// (elder = smaller birth, ties by birth vertex id); each component also
/// contributes an essential H0 bar (min f, max f). Each independent cycle
/// contributes an H1 bar born at its closing edge value and dying at the
/// max of f over its final component. Zero-persistence bars are dropped.
inline std::pair<PersistenceDiagram, PersistenceDiagram> extended_persistence(
    const Graph& g, const VertexFunction& f) {
    validate_graph(g);
    if (f.values.size() != g.n)
        throw std::invalid_argument("extended_persistence: function length mismatch");
    PersistenceDiagram h0, h1;
    h0.homology_dim = 0;
    h1.homology_dim = 1;
    if (g.n == 0) return {h0, h1};

    struct EdgeRec {
        double value;   // max endpoint
        double lower;   // min endpoint
        std::size_t index;
        int u, v;
    };
    std::vector<EdgeRec> order;
    order.reserve(g.edges.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const auto& [u, v] = g.edges[e];
        order.push_back({std::max(f.values[u], f.values[v]),
                         std::min(f.values[u], f.values[v]), e, u, v});
    }
    std::sort(order.begin(), order.end(), [](const EdgeRec& a, const EdgeRec& b) {
        if (a.value != b.value) return a.value < b.value;
        if (a.lower != b.lower) return a.lower < b.lower;
        return a.index < b.index;
    });

    detail::UnionFind uf(g.n);
    // per-root birth value and birth vertex (eldership key)
    std::vector<double> birth(f.values);
    std::vector<int> birth_vertex(g.n);
    std::iota(birth_vertex.begin(), birth_vertex.end(), 0);
    std::vector<std::pair<std::size_t, double>> cycle_edges;  // (edge index, birth)

    for (const auto& e : order) {
        int ru = uf.find(e.u), rv = uf.find(e.v);
        if (ru == rv) {
            cycle_edges.emplace_back(e.index, e.value);
            continue;
        }
        // elder: smaller (birth, birth vertex)
        if (std::tie(birth[rv], birth_vertex[rv]) < std::tie(birth[ru], birth_vertex[ru]))
            std::swap(ru, rv);
        // rv is younger and dies at the merge
        if (e.value > birth[rv]) h0.points.push_back({birth[rv], e.value});
        uf.parent[rv] = ru;
    }

    // essential bars: one per final component, death = max f on the component
    std::vector<double> comp_max(g.n, -std::numeric_limits<double>::infinity());
    for (std::size_t v = 0; v < g.n; ++v) {
        const int r = uf.find(static_cast<int>(v));
        comp_max[r] = std::max(comp_max[r], f.values[v]);
    }
    for (std::size_t v = 0; v < g.n; ++v)
        if (uf.find(static_cast<int>(v)) == static_cast<int>(v))
            if (comp_max[v] > birth[v]) h0.points.push_back({birth[v], comp_max[v]});

    for (const auto& [e_idx, b] : cycle_edges) {
        const int r = uf.find(g.edges[e_idx].first);
        if (comp_max[r] > b) h1.points.push_back({b, comp_max[r]});
    }
    return {h0, h1};
}

/// Multiset union of diagrams followed by the top-N persistence filter.
inline PersistenceDiagram pool_descriptors(const std::vector<PersistenceDiagram>& diagrams,
                                           std::size_t n_max) {
    if (diagrams.empty()) throw std::invalid_argument("pool_descriptors: empty input");
    PersistenceDiagram merged;
    for (const auto& d : diagrams)
        merged.points.insert(merged.points.end(), d.points.begin(), d.points.end());
    return filter_top_n(merged, n_max);
}

struct TuDataset {
    std::vector<Graph> graphs;
    std::vector<int> labels;  // remapped to 0..k-1 by ascending original label
};

namespace detail {

// whitespace/comma tolerant integer row
inline std::vector<long long> parse_int_row(const std::string& line, const std::string& file,
                                            std::size_t line_no) {
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream ss(cleaned);
    std::vector<long long> out;
    long long v;
    while (ss >> v) out.push_back(v);
    if (!ss.eof()) {
        std::string rest;
        ss.clear();
        ss >> rest;
        if (!rest.empty())
            throw std::runtime_error(file + ":" + std::to_string(line_no) +
                                     ": expected integers, got '" + line + "'");
    }
    return out;
}

inline std::filesystem::path find_tu_file(const std::filesystem::path& dir,
                                          const std::string& suffix) {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            return entry.path();
    }
    throw std::runtime_error("load_tu_dataset: missing *" + suffix + " in " + dir.string());
}

}  // namespace detail

/// Read a TU-format dataset directory: DS_A.txt (1-indexed edge list),
/// DS_graph_indicator.txt, DS_graph_labels.txt. Labels are remapped to
/// 0..k-1 preserving ascending order of the original values.
inline TuDataset load_tu_dataset(const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path dir(path);
    if (!fs::is_directory(dir))
        throw std::runtime_error("load_tu_dataset: not a directory: " + path);

    const fs::path a_file = detail::find_tu_file(dir, "_A.txt");
    const fs::path ind_file = detail::find_tu_file(dir, "_graph_indicator.txt");
    const fs::path lab_file = detail::find_tu_file(dir, "_graph_labels.txt");

    std::vector<long long> indicator;
    {
        std::ifstream in(ind_file);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto row = detail::parse_int_row(line, ind_file.string(), line_no);
            if (row.empty()) continue;
            if (row.size() != 1)
                throw std::runtime_error(ind_file.string() + ":" + std::to_string(line_no) +
                                         ": expected one graph id per line");
            indicator.push_back(row[0]);
        }
    }
    if (indicator.empty()) throw std::runtime_error("load_tu_dataset: empty graph indicator");
    const long long n_graphs = *std::max_element(indicator.begin(), indicator.end());

    TuDataset ds;
    ds.graphs.resize(static_cast<std::size_t>(n_graphs));
    std::vector<long long> vertex_base(indicator.size());  // global -> local offset
    {
        std::vector<long long> counts(static_cast<std::size_t>(n_graphs), 0);
        for (std::size_t v = 0; v < indicator.size(); ++v) {
            const long long gid = indicator[v];
            if (gid < 1 || gid > n_graphs)
                throw std::runtime_error(ind_file.string() + ":" + std::to_string(v + 1) +
                                         ": graph id out of range");
            vertex_base[v] = counts[static_cast<std::size_t>(gid - 1)]++;
        }
        for (long long g = 0; g < n_graphs; ++g)
            ds.graphs[static_cast<std::size_t>(g)].n =
                static_cast<std::size_t>(counts[static_cast<std::size_t>(g)]);
    }

    {
        std::ifstream in(a_file);
        std::string line;
        std::size_t line_no = 0;
        std::vector<std::set<std::pair<int, int>>> seen(static_cast<std::size_t>(n_graphs));
        while (std::getline(in, line)) {
            ++line_no;
            const auto row = detail::parse_int_row(line, a_file.string(), line_no);
            if (row.empty()) continue;
            if (row.size() != 2)
                throw std::runtime_error(a_file.string() + ":" + std::to_string(line_no) +
                                         ": expected 'u, v'");
            const long long u = row[0], v = row[1];
            if (u < 1 || v < 1 || u > static_cast<long long>(indicator.size()) ||
                v > static_cast<long long>(indicator.size()))
                throw std::runtime_error(a_file.string() + ":" + std::to_string(line_no) +
                                         ": vertex id out of range");
            if (indicator[static_cast<std::size_t>(u - 1)] !=
                indicator[static_cast<std::size_t>(v - 1)])
                throw std::runtime_error(a_file.string() + ":" + std::to_string(line_no) +
                                         ": edge joins different graphs");
            if (u == v) continue;  // self-loops are dropped
            const std::size_t gid = static_cast<std::size_t>(indicator[u - 1] - 1);
            const int lu = static_cast<int>(vertex_base[static_cast<std::size_t>(u - 1)]);
            const int lv = static_cast<int>(vertex_base[static_cast<std::size_t>(v - 1)]);
            const auto key = std::minmax(lu, lv);
            if (seen[gid].insert({key.first, key.second}).second)
                ds.graphs[gid].edges.push_back({key.first, key.second});
        }
    }

    {
        std::ifstream in(lab_file);
        std::string line;
        std::size_t line_no = 0;
        std::vector<long long> raw;
        while (std::getline(in, line)) {
            ++line_no;
            const auto row = detail::parse_int_row(line, lab_file.string(), line_no);
            if (row.empty()) continue;
            if (row.size() != 1)
                throw std::runtime_error(lab_file.string() + ":" + std::to_string(line_no) +
                                         ": expected one label per line");
            raw.push_back(row[0]);
        }
        if (static_cast<long long>(raw.size()) != n_graphs)
            throw std::runtime_error(lab_file.string() + ": expected " +
                                     std::to_string(n_graphs) + " labels, got " +
                                     std::to_string(raw.size()));
        std::vector<long long> distinct = raw;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (long long v : raw) {
            const auto it = std::lower_bound(distinct.begin(), distinct.end(), v);
            ds.labels.push_back(static_cast<int>(it - distinct.begin()));
        }
    }
    return ds;
}

/// Per-graph user-supplied vertex values: one value per line, in the
/// dataset's global vertex order.
inline std::vector<VertexFunction> load_vertex_function_table(const std::string& file,
                                                              const TuDataset& ds,
                                                              const std::string& name) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("load_vertex_function_table: cannot open " + file);
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            values.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw std::runtime_error(file + ":" + std::to_string(line_no) +
                                     ": expected a real value");
        }
    }
    std::size_t total = 0;
    for (const auto& g : ds.graphs) total += g.n;
    if (values.size() != total)
        throw std::runtime_error(file + ": expected " + std::to_string(total) +
                                 " vertex values, got " + std::to_string(values.size()));
    std::vector<VertexFunction> out;
    std::size_t at = 0;
    for (const auto& g : ds.graphs) {
        VertexFunction f;
        f.descriptor_name = name;
        f.values.assign(values.begin() + static_cast<long>(at),
                        values.begin() + static_cast<long>(at + g.n));
        at += g.n;
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace place
