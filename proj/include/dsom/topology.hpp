#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dsom {

enum class GridLayout { hex, rect, custom };

/// The prior structure on the models: an undirected connected graph over
/// vertices 0..M-1 with the full table of shortest-path distances. Immutable
/// after construction.
class PriorGraph {
public:
    static PriorGraph from_edges(std::int32_t m_models,
                                 const std::vector<std::pair<std::int32_t, std::int32_t>>& edges,
                                 GridLayout layout = GridLayout::custom) {
        if (m_models <= 0) throw std::invalid_argument("PriorGraph: need at least one model");
        PriorGraph g;
        g.m_ = m_models;
        g.layout_ = layout;
        g.adjacency_.resize(static_cast<std::size_t>(m_models));
        for (const auto& [a, b] : edges) {
            if (a < 0 || b < 0 || a >= m_models || b >= m_models || a == b)
                throw std::invalid_argument("PriorGraph: invalid edge");
            g.adjacency_[static_cast<std::size_t>(a)].push_back(b);
            g.adjacency_[static_cast<std::size_t>(b)].push_back(a);
        }
        for (auto& adj : g.adjacency_) {
            std::sort(adj.begin(), adj.end());
            adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
        }
        g.fill_distances();
        return g;
    }

    std::int32_t num_models() const { return m_; }
    GridLayout layout() const { return layout_; }
    std::int32_t diameter() const { return diameter_; }

    /// Shortest-path length between models j and k.
    std::int32_t distance(std::int32_t j, std::int32_t k) const {
        return gdist_[static_cast<std::size_t>(j) * static_cast<std::size_t>(m_) +
                      static_cast<std::size_t>(k)];
    }

    const std::vector<std::int32_t>& neighbors(std::int32_t j) const {
        return adjacency_[static_cast<std::size_t>(j)];
    }

private:
    void fill_distances() {
        const auto m = static_cast<std::size_t>(m_);
        gdist_.assign(m * m, -1);
        std::deque<std::int32_t> queue;
        for (std::int32_t src = 0; src < m_; ++src) {
            auto* dist = gdist_.data() + static_cast<std::size_t>(src) * m;
            dist[src] = 0;
            queue.clear();
            queue.push_back(src);
            while (!queue.empty()) {
                const std::int32_t v = queue.front();
                queue.pop_front();
                for (std::int32_t w : adjacency_[static_cast<std::size_t>(v)]) {
                    if (dist[w] < 0) {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            for (std::size_t k = 0; k < m; ++k) {
                if (dist[k] < 0)
                    throw std::invalid_argument("PriorGraph: graph is not connected");
            }
        }
        diameter_ = *std::max_element(gdist_.begin(), gdist_.end());
    }

    std::int32_t m_ = 0;
    std::int32_t diameter_ = 0;
    GridLayout layout_ = GridLayout::custom;
    std::vector<std::vector<std::int32_t>> adjacency_;
    std::vector<std::int32_t> gdist_;
};

/// Hexagonal m x m grid in axial coordinates (q, r), vertex index r*m + q.
/// Each interior vertex has six neighbors: (q±1, r), (q, r±1), (q+1, r-1)
/// and (q-1, r+1). There is no (+1, +1) step.
inline PriorGraph hex_grid(std::int32_t m) {
    if (m < 1) throw std::invalid_argument("hex_grid: side length must be at least 1");
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    auto index = [m](std::int32_t q, std::int32_t r) { return r * m + q; };
    constexpr std::int32_t dq[] = {1, -1, 0, 0, 1, -1};
    constexpr std::int32_t dr[] = {0, 0, 1, -1, -1, 1};
    for (std::int32_t r = 0; r < m; ++r) {
        for (std::int32_t q = 0; q < m; ++q) {
            for (int step = 0; step < 6; ++step) {
                const std::int32_t nq = q + dq[step];
                const std::int32_t nr = r + dr[step];
                if (nq < 0 || nr < 0 || nq >= m || nr >= m) continue;
                if (index(nq, nr) > index(q, r)) edges.emplace_back(index(q, r), index(nq, nr));
            }
        }
    }
    return PriorGraph::from_edges(m * m, edges, GridLayout::hex);
}

/// Rectangular m x m grid with 4-neighborhood.
inline PriorGraph rect_grid(std::int32_t m) {
    if (m < 1) throw std::invalid_argument("rect_grid: side length must be at least 1");
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    auto index = [m](std::int32_t q, std::int32_t r) { return r * m + q; };
    for (std::int32_t r = 0; r < m; ++r) {
        for (std::int32_t q = 0; q < m; ++q) {
            if (q + 1 < m) edges.emplace_back(index(q, r), index(q + 1, r));
            if (r + 1 < m) edges.emplace_back(index(q, r), index(q, r + 1));
        }
    }
    return PriorGraph::from_edges(m * m, edges, GridLayout::rect);
}

/// Per-model evaluation order: the models sorted by increasing graph distance
/// from j, ties by increasing model index. Position 0 is always j itself.
inline std::vector<std::int32_t> representation_order(const PriorGraph& graph, std::int32_t j) {
    if (j < 0 || j >= graph.num_models())
        throw std::invalid_argument("representation_order: model index out of range");
    std::vector<std::int32_t> order(static_cast<std::size_t>(graph.num_models()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        return graph.distance(a, j) < graph.distance(b, j);
    });
    return order;
}

/// The evaluation order of one model together with the boundaries of its
/// distance levels: models order[level_begin[t]..level_begin[t+1]) all sit at
/// graph distance level_dist[t] from the anchor model. Grouping weighted sums
/// by level makes their floating-point value independent of which algorithm
/// variant evaluates them, because all models in one level share one kernel
/// weight.
struct LevelOrder {
    std::vector<std::int32_t> order;       // the permutation, anchor first
    std::vector<std::int32_t> level_begin; // size num_levels()+1, level_begin[0] = 0
    std::vector<std::int32_t> level_dist;  // graph distance of each level

    std::int32_t num_levels() const { return static_cast<std::int32_t>(level_dist.size()); }
};

inline LevelOrder level_order(const PriorGraph& graph, std::int32_t j) {
    LevelOrder lo;
    lo.order = representation_order(graph, j);
    std::int32_t prev = -1;
    for (std::size_t pos = 0; pos < lo.order.size(); ++pos) {
        const std::int32_t d = graph.distance(lo.order[pos], j);
        if (d != prev) {
            lo.level_begin.push_back(static_cast<std::int32_t>(pos));
            lo.level_dist.push_back(d);
            prev = d;
        }
    }
    lo.level_begin.push_back(static_cast<std::int32_t>(lo.order.size()));
    return lo;
}

inline std::vector<LevelOrder> all_level_orders(const PriorGraph& graph) {
    std::vector<LevelOrder> out;
    out.reserve(static_cast<std::size_t>(graph.num_models()));
    for (std::int32_t j = 0; j < graph.num_models(); ++j) out.push_back(level_order(graph, j));
    return out;
}

/// Epoch-indexed neighborhood kernel. The width shrinks geometrically from
/// sigma_initial at epoch 1 to sigma_final at epoch L, so the neighborhood is
/// broad early and sharpens as training proceeds. The Gaussian is never
/// truncated: every model keeps a strictly positive weight at every epoch.
struct KernelSchedule {
    std::int32_t epochs = 100;
    double sigma_initial = 1.0;
    double sigma_final = 0.5;

    void validate() const {
        if (epochs < 1) throw std::invalid_argument("KernelSchedule: epochs must be at least 1");
        if (!(sigma_final > 0.0) || !(sigma_initial >= sigma_final))
            throw std::invalid_argument("KernelSchedule: need sigma_initial >= sigma_final > 0");
    }

    double sigma_at(std::int32_t l) const {
        if (l < 1 || l > epochs) throw std::invalid_argument("KernelSchedule: epoch out of range");
        if (epochs == 1) return sigma_initial;
        const double a = static_cast<double>(l - 1) / static_cast<double>(epochs - 1);
        return sigma_initial * std::pow(sigma_final / sigma_initial, a);
    }
};

inline KernelSchedule default_schedule(const PriorGraph& graph, std::int32_t epochs) {
    KernelSchedule ks;
    ks.epochs = epochs;
    ks.sigma_initial = std::max(0.5, static_cast<double>(graph.diameter()) / 2.0);
    ks.sigma_final = 0.5;
    ks.validate();
    return ks;
}

/// Gaussian kernel value exp(-s^2 / (2 sigma_l^2)): 1 at distance 0, strictly
/// decreasing in s, never zero.
inline double kernel_value(const KernelSchedule& schedule, std::int32_t l, double s) {
    if (s < 0.0) throw std::invalid_argument("kernel_value: distance must be nonnegative");
    const double sigma = schedule.sigma_at(l);
    return std::exp(-(s * s) / (2.0 * sigma * sigma));
}

/// Kernel value per graph distance 0..diameter for one epoch. This is the
/// table the inner loops read; it is computed once per epoch.
inline std::vector<double> kernel_by_distance(const KernelSchedule& schedule,
                                              const PriorGraph& graph, std::int32_t l) {
    std::vector<double> kappa(static_cast<std::size_t>(graph.diameter()) + 1);
    for (std::size_t s = 0; s < kappa.size(); ++s)
        kappa[s] = kernel_value(schedule, l, static_cast<double>(s));
    return kappa;
}

/// Full M x M neighborhood table h[u][j] = K_l(g(u, j)).
struct NeighborhoodTable {
    std::int32_t epoch = 0;
    std::int32_t m_models = 0;
    std::vector<double> h; // row-major M x M

    double at(std::int32_t u, std::int32_t j) const {
        return h[static_cast<std::size_t>(u) * static_cast<std::size_t>(m_models) +
                 static_cast<std::size_t>(j)];
    }
};

inline NeighborhoodTable neighborhood_table(const KernelSchedule& schedule, const PriorGraph& graph,
                                            std::int32_t l) {
    const std::vector<double> kappa = kernel_by_distance(schedule, graph, l);
    NeighborhoodTable table;
    table.epoch = l;
    table.m_models = graph.num_models();
    const auto m = static_cast<std::size_t>(graph.num_models());
    table.h.resize(m * m);
    for (std::int32_t u = 0; u < graph.num_models(); ++u)
        for (std::int32_t j = 0; j < graph.num_models(); ++j)
            table.h[static_cast<std::size_t>(u) * m + static_cast<std::size_t>(j)] =
                kappa[static_cast<std::size_t>(graph.distance(u, j))];
    return table;
}

} // namespace dsom
