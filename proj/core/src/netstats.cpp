#include "gclab/netstats.hpp"

#include <algorithm>
#include <limits>

#include "gclab/parallel.hpp"

namespace gclab {

std::size_t count_triangles(const Graph& g) {
    // Each triangle u < v < w is found once, from its smallest pair (u, v),
    // by merging the sorted neighbor lists above v.
    std::size_t triangles = 0;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        auto nu = g.neighbors(u);
        for (NodeId v : nu) {
            if (v <= u) continue;
            auto nv = g.neighbors(v);
            auto a = std::upper_bound(nu.begin(), nu.end(), v);
            auto b = std::upper_bound(nv.begin(), nv.end(), v);
            while (a != nu.end() && b != nv.end()) {
                if (*a < *b) {
                    ++a;
                } else if (*b < *a) {
                    ++b;
                } else {
                    ++triangles;
                    ++a;
                    ++b;
                }
            }
        }
    }
    return triangles;
}

std::size_t count_triads(const Graph& g) {
    std::size_t triads = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const std::size_t d = g.degree(v);
        triads += d * (d - (d > 0 ? 1 : 0)) / 2;
    }
    return triads;
}

double transitivity(const Graph& g) {
    const std::size_t triads = count_triads(g);
    if (triads == 0) return 0.0;
    return 3.0 * static_cast<double>(count_triangles(g)) / static_cast<double>(triads);
}

std::vector<NodeId> largest_component(const Graph& g) {
    const std::size_t n = g.num_nodes();
    constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> comp(n, kUnseen);
    std::vector<NodeId> queue;
    std::size_t best_comp = 0, best_size = 0, next_comp = 0;
    for (NodeId s = 0; s < n; ++s) {
        if (comp[s] != kUnseen) continue;
        queue.assign(1, s);
        comp[s] = next_comp;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for (NodeId u : g.neighbors(queue[head])) {
                if (comp[u] == kUnseen) {
                    comp[u] = next_comp;
                    queue.push_back(u);
                }
            }
        }
        if (queue.size() > best_size) {
            best_size = queue.size();
            best_comp = next_comp;
        }
        ++next_comp;
    }
    std::vector<NodeId> out;
    out.reserve(best_size);
    for (NodeId v = 0; v < n; ++v) {
        if (comp[v] == best_comp) out.push_back(v);
    }
    return out;
}

double avg_path_length(const Graph& g) {
    const auto nodes = largest_component(g);
    if (nodes.size() < 2) throw UndefinedStatistic("avg_path_length: largest component has fewer than 2 nodes");
    const Graph lcc = nodes.size() == g.num_nodes() ? g : g.induced_subgraph(nodes);
    const std::size_t n = lcc.num_nodes();
    std::vector<std::uint32_t> dist(n);
    std::vector<NodeId> queue(n);
    std::uint64_t total = 0;
    for (NodeId s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<std::uint32_t>::max());
        dist[s] = 0;
        std::size_t head = 0, tail = 0;
        queue[tail++] = s;
        while (head < tail) {
            const NodeId v = queue[head++];
            total += dist[v];
            for (NodeId u : lcc.neighbors(v)) {
                if (dist[u] == std::numeric_limits<std::uint32_t>::max()) {
                    dist[u] = dist[v] + 1;
                    queue[tail++] = u;
                }
            }
        }
    }
    return static_cast<double>(total) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

GraphStats stats(const Graph& g) {
    GraphStats s;
    s.num_nodes = g.num_nodes();
    s.num_edges = g.num_edges();
    const double n = static_cast<double>(s.num_nodes);
    const double m = static_cast<double>(s.num_edges);
    s.avg_degree = s.num_nodes > 0 ? 2.0 * m / n : 0.0;
    s.density = s.num_nodes > 1 ? 2.0 * m / (n * (n - 1.0)) : 0.0;
    s.transitivity = transitivity(g);
    s.max_degree = g.max_degree();
    try {
        s.avg_path_length = avg_path_length(g);
    } catch (const UndefinedStatistic&) {
        s.avg_path_length.reset();
    }
    return s;
}

namespace {
void accumulate(Summary& s, double x) {
    if (s.count == 0) {
        s.min = s.max = x;
    } else {
        s.min = std::min(s.min, x);
        s.max = std::max(s.max, x);
    }
    s.mean += (x - s.mean) / static_cast<double>(++s.count);
}
}  // namespace

std::vector<ClassSummary> summarize_dataset(const LabeledDataset& ds, std::size_t workers) {
    std::vector<GraphStats> per_graph(ds.size());
    parallel_for(ds.size(), workers, [&](std::size_t i) { per_graph[i] = stats(ds.graphs[i].graph); });

    std::vector<ClassSummary> rows(kNumClasses);
    for (std::size_t c = 0; c < kNumClasses; ++c) rows[c].label = class_from_code(c);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto& row = rows[class_code(ds.graphs[i].label)];
        const auto& s = per_graph[i];
        ++row.graphs;
        accumulate(row.nodes, static_cast<double>(s.num_nodes));
        accumulate(row.edges, static_cast<double>(s.num_edges));
        accumulate(row.avg_degree, s.avg_degree);
        accumulate(row.density, s.density);
        accumulate(row.transitivity, s.transitivity);
        if (s.avg_path_length) accumulate(row.avg_path_length, *s.avg_path_length);
    }
    std::erase_if(rows, [](const ClassSummary& r) { return r.graphs == 0; });
    return rows;
}

}  // namespace gclab
