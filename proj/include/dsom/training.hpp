#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsom/matrix.hpp"
#include "dsom/rng.hpp"
#include "dsom/topology.hpp"

namespace dsom {

enum class Variant { brute, partial, earlystop, memory, fast };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::brute: return "brute";
        case Variant::partial: return "partial";
        case Variant::earlystop: return "earlystop";
        case Variant::memory: return "memory";
        case Variant::fast: return "fast";
    }
    return "?";
}

inline Variant variant_from_name(const std::string& name) {
    for (Variant v : {Variant::brute, Variant::partial, Variant::earlystop, Variant::memory,
                      Variant::fast}) {
        if (name == variant_name(v)) return v;
    }
    throw std::invalid_argument("unknown variant '" + name + "'");
}

enum class UpdateStrategy { block, individual };

inline const char* strategy_name(UpdateStrategy s) {
    return s == UpdateStrategy::block ? "block" : "individual";
}

struct DsomConfig {
    Variant variant = Variant::fast;
    KernelSchedule schedule;
    double ratio = 7.0;     // switch threshold divisor: block update when nb_switch >= N/ratio
    std::uint64_t seed = 1;
    // Test hook: replaces the smallest-index tie rule of the ordered scheme
    // with first-encountered-in-visit-order. Used to verify that the
    // equivalence checker actually detects divergent tie handling.
    bool inject_tie_fault = false;

    void validate() const {
        schedule.validate();
        if (!(ratio >= 1.0))
            throw std::invalid_argument("DsomConfig: ratio must be at least 1");
    }
};

struct EpochStats {
    std::int32_t epoch = 0;
    std::int32_t nb_switch = 0;
    UpdateStrategy strategy = UpdateStrategy::block;
    std::uint64_t candidates_evaluated = 0;
    std::uint64_t terms_accumulated = 0;
};

struct TrainingResult {
    std::vector<std::int32_t> prototypes;  // observation index per model
    std::vector<std::int32_t> assignments; // model index per observation, from the final pass
    double quantization_error = 0.0;
    std::vector<EpochStats> epoch_stats;
};

/// Per-cluster column sums: entry (k, u) holds the summed dissimilarity from
/// every member of cluster u to observation k. Stored candidate-major so that
/// evaluating one candidate reads one contiguous row.
class PartialSumTable {
public:
    PartialSumTable(std::int32_t n, std::int32_t m)
        : n_(n), m_(m), table_(static_cast<std::size_t>(n) * static_cast<std::size_t>(m), 0.0) {}

    std::int32_t num_observations() const { return n_; }
    std::int32_t num_clusters() const { return m_; }

    double at(std::int32_t k, std::int32_t u) const {
        return table_[static_cast<std::size_t>(k) * static_cast<std::size_t>(m_) +
                      static_cast<std::size_t>(u)];
    }

    std::span<const double> row(std::int32_t k) const {
        return {table_.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(m_),
                static_cast<std::size_t>(m_)};
    }

    /// Full recomputation of every column. Members are accumulated in cluster
    /// list order.
    void compute_full(const std::vector<std::vector<std::int32_t>>& clusters,
                      const DissimilarityMatrix& matrix) {
        std::fill(table_.begin(), table_.end(), 0.0);
        for (std::int32_t u = 0; u < m_; ++u) add_cluster(u, clusters[static_cast<std::size_t>(u)], matrix);
    }

    /// Block update: recompute only the columns of clusters whose membership
    /// changed; untouched columns keep their previous values.
    void refresh_changed(const std::vector<std::vector<std::int32_t>>& clusters,
                         const DissimilarityMatrix& matrix, const std::vector<std::uint8_t>& changed) {
        for (std::int32_t u = 0; u < m_; ++u) {
            if (!changed[static_cast<std::size_t>(u)]) continue;
            for (std::int32_t k = 0; k < n_; ++k)
                table_[static_cast<std::size_t>(k) * static_cast<std::size_t>(m_) +
                       static_cast<std::size_t>(u)] = 0.0;
            add_cluster(u, clusters[static_cast<std::size_t>(u)], matrix);
        }
    }

    struct Move {
        std::int32_t observation;
        std::int32_t from; // cluster at the previous epoch
        std::int32_t to;   // cluster at this epoch
    };

    /// Individual update: subtract each moved observation's dissimilarity row
    /// from its old cluster's column and add it to the new one. Returns the
    /// number of additions performed (2N per move).
    std::uint64_t apply_moves(const std::vector<Move>& moves, const DissimilarityMatrix& matrix) {
        std::uint64_t additions = 0;
        for (const Move& mv : moves) {
            if (mv.from == mv.to)
                throw std::invalid_argument("PartialSumTable::apply_moves: move with from == to");
            if (mv.from < 0 || mv.to < 0 || mv.from >= m_ || mv.to >= m_)
                throw std::invalid_argument("PartialSumTable::apply_moves: cluster index out of range");
            const auto row_i = matrix.row(mv.observation);
            double* t = table_.data();
            for (std::int32_t k = 0; k < n_; ++k) {
                const double d = row_i[static_cast<std::size_t>(k)];
                const std::size_t base = static_cast<std::size_t>(k) * static_cast<std::size_t>(m_);
                t[base + static_cast<std::size_t>(mv.from)] -= d;
                t[base + static_cast<std::size_t>(mv.to)] += d;
            }
            additions += 2 * static_cast<std::uint64_t>(n_);
        }
        return additions;
    }

private:
    void add_cluster(std::int32_t u, const std::vector<std::int32_t>& members,
                     const DissimilarityMatrix& matrix) {
        for (std::int32_t i : members) {
            const auto row_i = matrix.row(i);
            double* t = table_.data();
            for (std::int32_t k = 0; k < n_; ++k)
                t[static_cast<std::size_t>(k) * static_cast<std::size_t>(m_) +
                  static_cast<std::size_t>(u)] += row_i[static_cast<std::size_t>(k)];
        }
    }

    std::int32_t n_;
    std::int32_t m_;
    std::vector<double> table_;
};

/// M distinct observation indices drawn uniformly without replacement.
inline std::vector<std::int32_t> init_prototypes(std::int32_t n, std::int32_t m_models, Rng& rng) {
    if (m_models > n)
        throw std::invalid_argument("init_prototypes: more models than observations");
    return rng.sample_without_replacement(n, m_models);
}

/// Best matching unit for one observation: the model whose prototype has
/// minimal dissimilarity to it. Ties are resolved by growing a neighborhood
/// around each tied model: at radius r, each surviving candidate j is scored
/// by the summed dissimilarity from the observation to all prototypes within
/// graph distance r of j, and only the minimizers survive. Remaining ties at
/// the graph diameter go to the smallest model index. Each candidate touches
/// each model at most once across all radii, so the worst case is O(M^2) per
/// observation while the unique-minimum case stays O(M).
inline std::int32_t best_matching_unit(std::int32_t i, const std::vector<std::int32_t>& prototypes,
                                       const DissimilarityMatrix& matrix, const PriorGraph& graph,
                                       const std::vector<LevelOrder>& levels) {
    const auto row = matrix.row(i);
    const auto m = static_cast<std::int32_t>(prototypes.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::int32_t j = 0; j < m; ++j) {
        const double d = row[static_cast<std::size_t>(prototypes[static_cast<std::size_t>(j)])];
        if (d < best) best = d;
    }
    std::vector<std::int32_t> survivors;
    for (std::int32_t j = 0; j < m; ++j) {
        if (row[static_cast<std::size_t>(prototypes[static_cast<std::size_t>(j)])] == best)
            survivors.push_back(j);
    }
    if (survivors.size() == 1) return survivors.front();

    // Growing-neighborhood affinities. affinity[c] already contains the
    // radius-0 ball (the candidate's own prototype).
    std::vector<double> affinity(survivors.size(), best);
    std::vector<std::int32_t> next_level(survivors.size(), 1);
    std::vector<std::int32_t> keep;
    for (std::int32_t r = 1; r <= graph.diameter() && survivors.size() > 1; ++r) {
        double round_best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < survivors.size(); ++c) {
            const std::int32_t j = survivors[c];
            const LevelOrder& lo = levels[static_cast<std::size_t>(j)];
            std::int32_t t = next_level[c];
            while (t < lo.num_levels() && lo.level_dist[static_cast<std::size_t>(t)] <= r) {
                for (std::int32_t pos = lo.level_begin[static_cast<std::size_t>(t)];
                     pos < lo.level_begin[static_cast<std::size_t>(t) + 1]; ++pos) {
                    const std::int32_t u = lo.order[static_cast<std::size_t>(pos)];
                    affinity[c] += row[static_cast<std::size_t>(
                        prototypes[static_cast<std::size_t>(u)])];
                }
                ++t;
            }
            next_level[c] = t;
            if (affinity[c] < round_best) round_best = affinity[c];
        }
        keep.clear();
        std::vector<double> kept_affinity;
        std::vector<std::int32_t> kept_next;
        for (std::size_t c = 0; c < survivors.size(); ++c) {
            if (affinity[c] == round_best) {
                keep.push_back(survivors[c]);
                kept_affinity.push_back(affinity[c]);
                kept_next.push_back(next_level[c]);
            }
        }
        survivors.swap(keep);
        affinity.swap(kept_affinity);
        next_level.swap(kept_next);
    }
    return survivors.front(); // ascending construction keeps the smallest index first
}

/// Neighborhood-weighted sum of one candidate against the current clustering,
/// evaluated from the partial-sum table. Terms are grouped by graph-distance
/// level: all clusters in one level share one kernel weight, so their partial
/// sums are added first (an exact operation on integer-valued data) and each
/// level contributes a single product. The resulting value is identical no
/// matter which algorithm variant asks for it, which is what keeps tie
/// handling consistent between variants.
inline double weighted_sum_from_partials(const LevelOrder& lo, const std::vector<double>& kappa,
                                         const PartialSumTable& psums, std::int32_t k) {
    const auto row = psums.row(k);
    double s = 0.0;
    for (std::int32_t t = 0; t < lo.num_levels(); ++t) {
        double level_sum = 0.0;
        for (std::int32_t pos = lo.level_begin[static_cast<std::size_t>(t)];
             pos < lo.level_begin[static_cast<std::size_t>(t) + 1]; ++pos)
            level_sum += row[static_cast<std::size_t>(lo.order[static_cast<std::size_t>(pos)])];
        s += kappa[static_cast<std::size_t>(lo.level_dist[static_cast<std::size_t>(t)])] * level_sum;
    }
    return s;
}

/// Same value computed without the partial-sum table: the per-cluster sums
/// are re-derived from the dissimilarity matrix for this one candidate
/// (cluster list order, like the table construction, and reading d(k, i)
/// which equals d(i, k) by symmetry). O(N) per call.
inline double weighted_sum_direct(const LevelOrder& lo, const std::vector<double>& kappa,
                                  const std::vector<std::vector<std::int32_t>>& clusters,
                                  const DissimilarityMatrix& matrix, std::int32_t k,
                                  std::vector<double>& cluster_sum_scratch) {
    const auto row_k = matrix.row(k);
    const auto m = clusters.size();
    cluster_sum_scratch.assign(m, 0.0);
    for (std::size_t u = 0; u < m; ++u) {
        double acc = 0.0;
        for (std::int32_t i : clusters[u]) acc += row_k[static_cast<std::size_t>(i)];
        cluster_sum_scratch[u] = acc;
    }
    double s = 0.0;
    for (std::int32_t t = 0; t < lo.num_levels(); ++t) {
        double level_sum = 0.0;
        for (std::int32_t pos = lo.level_begin[static_cast<std::size_t>(t)];
             pos < lo.level_begin[static_cast<std::size_t>(t) + 1]; ++pos)
            level_sum += cluster_sum_scratch[static_cast<std::size_t>(
                lo.order[static_cast<std::size_t>(pos)])];
        s += kappa[static_cast<std::size_t>(lo.level_dist[static_cast<std::size_t>(t)])] * level_sum;
    }
    return s;
}

/// Elementary search: every observation is tested as a prototype candidate,
/// each at O(N) cost, candidates scanned in increasing index so that ties go
/// to the smallest one. O(N^2) per model.
inline std::int32_t select_prototype_brute(const LevelOrder& lo, const std::vector<double>& kappa,
                                           const std::vector<std::vector<std::int32_t>>& clusters,
                                           const DissimilarityMatrix& matrix,
                                           std::vector<double>& cluster_sum_scratch,
                                           std::uint64_t* terms = nullptr) {
    const std::int32_t n = matrix.size();
    std::int32_t best_k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::int32_t k = 0; k < n; ++k) {
        const double s = weighted_sum_direct(lo, kappa, clusters, matrix, k, cluster_sum_scratch);
        if (terms) *terms += static_cast<std::uint64_t>(n);
        if (s < best) {
            best = s;
            best_k = k;
        }
    }
    return best_k;
}

/// Candidate scan over the partial-sum table, increasing index, O(M) per
/// candidate. Same minimizer and tie rule as the brute search.
inline std::int32_t select_prototype_partial(const LevelOrder& lo, const std::vector<double>& kappa,
                                             const PartialSumTable& psums,
                                             std::uint64_t* terms = nullptr) {
    const std::int32_t n = psums.num_observations();
    std::int32_t best_k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::int32_t k = 0; k < n; ++k) {
        const double s = weighted_sum_from_partials(lo, kappa, psums, k);
        if (terms) *terms += static_cast<std::uint64_t>(psums.num_clusters());
        if (s < best) {
            best = s;
            best_k = k;
        }
    }
    return best_k;
}

/// Ordered early-stopping search. Candidates are visited cluster by cluster,
/// clusters taken in increasing graph distance from the anchor model (close
/// clusters hold the likeliest prototypes, so a small running minimum is
/// found early). Each candidate's sum accumulates level by level and is
/// abandoned as soon as it strictly exceeds the running minimum: the terms
/// are nonnegative, so the partial value is a lower bound and no minimizer or
/// exact tie can be lost. Among completed candidates with equal sums the
/// smallest observation index wins, which makes the outcome independent of
/// the visiting order and identical to the plain candidate scan.
inline std::int32_t select_prototype_early_stop(const LevelOrder& lo,
                                                const std::vector<double>& kappa,
                                                const PartialSumTable& psums,
                                                const std::vector<std::vector<std::int32_t>>& clusters,
                                                std::uint64_t* terms = nullptr,
                                                bool tie_fault = false) {
    std::int32_t best_k = -1;
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t local_terms = 0;
    for (std::size_t v = 0; v < lo.order.size(); ++v) {
        const auto& members = clusters[static_cast<std::size_t>(lo.order[v])];
        for (std::int32_t k : members) {
            const auto row = psums.row(k);
            double s = 0.0;
            bool pruned = false;
            for (std::int32_t t = 0; t < lo.num_levels(); ++t) {
                double level_sum = 0.0;
                const std::int32_t begin = lo.level_begin[static_cast<std::size_t>(t)];
                const std::int32_t end = lo.level_begin[static_cast<std::size_t>(t) + 1];
                for (std::int32_t pos = begin; pos < end; ++pos)
                    level_sum +=
                        row[static_cast<std::size_t>(lo.order[static_cast<std::size_t>(pos)])];
                local_terms += static_cast<std::uint64_t>(end - begin);
                s += kappa[static_cast<std::size_t>(lo.level_dist[static_cast<std::size_t>(t)])] *
                     level_sum;
                if (s > best) {
                    pruned = true;
                    break;
                }
            }
            if (pruned) continue;
            if (s < best) {
                best = s;
                best_k = k;
            } else if (!tie_fault && s == best && k < best_k) {
                best_k = k;
            }
        }
    }
    if (terms) *terms += local_terms;
    return best_k;
}

/// Block update is worth it once at least N/ratio observations switched
/// clusters; below that, per-observation add/subtract updates are cheaper.
inline UpdateStrategy choose_update_strategy(std::int32_t nb_switch, std::int32_t n, double ratio) {
    return static_cast<double>(nb_switch) >= static_cast<double>(n) / ratio
               ? UpdateStrategy::block
               : UpdateStrategy::individual;
}

/// Mean dissimilarity of each observation to its assigned prototype.
inline double quantization_error(const std::vector<std::int32_t>& assignments,
                                 const std::vector<std::int32_t>& prototypes,
                                 const DissimilarityMatrix& matrix) {
    double sum = 0.0;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        sum += matrix.at(static_cast<std::int32_t>(i),
                         prototypes[static_cast<std::size_t>(assignments[i])]);
    return sum / static_cast<double>(assignments.size());
}

/// Clusters as ordered member lists: the cluster's previous prototype leads
/// if it is still a member (it is the likeliest candidate to win again and
/// the ordered scheme tests it first), remaining members follow in increasing
/// observation index.
inline std::vector<std::vector<std::int32_t>>
build_clusters(const std::vector<std::int32_t>& assignments,
               const std::vector<std::int32_t>& previous_prototypes, std::int32_t m_models) {
    std::vector<std::vector<std::int32_t>> clusters(static_cast<std::size_t>(m_models));
    std::vector<std::uint8_t> placed(assignments.size(), 0);
    for (std::int32_t u = 0; u < m_models; ++u) {
        const std::int32_t p = previous_prototypes[static_cast<std::size_t>(u)];
        if (assignments[static_cast<std::size_t>(p)] == u && !placed[static_cast<std::size_t>(p)]) {
            clusters[static_cast<std::size_t>(u)].push_back(p);
            placed[static_cast<std::size_t>(p)] = 1;
        }
    }
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (!placed[i])
            clusters[static_cast<std::size_t>(assignments[i])].push_back(static_cast<std::int32_t>(i));
    }
    return clusters;
}

/// Everything the per-epoch observer can see. The partial-sum table pointer
/// is null for the brute variant, which does not maintain one.
struct EpochSnapshot {
    std::int32_t epoch = 0;
    const std::vector<std::int32_t>& prototypes;
    const std::vector<std::int32_t>& previous_prototypes;
    const std::vector<std::int32_t>& assignments;
    const std::vector<std::vector<std::int32_t>>& clusters;
    const std::vector<double>& kernel_by_dist;
    const PartialSumTable* partial_sums;
    const EpochStats& stats;
};

using EpochObserver = std::function<void(const EpochSnapshot&)>;

struct AffectationOutcome {
    std::int32_t nb_switch = 0;
    std::vector<PartialSumTable::Move> moves;
    std::vector<std::uint8_t> cluster_changed;
};

/// One full assignment pass: recompute every observation's best matching
/// unit, count switches and flag both clusters touched by each switch.
inline AffectationOutcome affectation_phase(std::vector<std::int32_t>& assignments,
                                            const std::vector<std::int32_t>& previous_assignments,
                                            const std::vector<std::int32_t>& prototypes,
                                            const DissimilarityMatrix& matrix,
                                            const PriorGraph& graph,
                                            const std::vector<LevelOrder>& levels) {
    const std::int32_t n = matrix.size();
    AffectationOutcome out;
    out.cluster_changed.assign(static_cast<std::size_t>(graph.num_models()), 0);
    for (std::int32_t i = 0; i < n; ++i) {
        const std::int32_t c = best_matching_unit(i, prototypes, matrix, graph, levels);
        const std::int32_t prev = previous_assignments[static_cast<std::size_t>(i)];
        if (c != prev) {
            ++out.nb_switch;
            if (prev >= 0) {
                out.cluster_changed[static_cast<std::size_t>(prev)] = 1;
                out.moves.push_back({i, prev, c});
            }
            out.cluster_changed[static_cast<std::size_t>(c)] = 1;
        }
        assignments[static_cast<std::size_t>(i)] = c;
    }
    return out;
}

/// Batch training driver. All five variants share initialization, the
/// assignment pass and the tie rules; they differ only in how the
/// representation phase evaluates candidates and how the partial-sum table is
/// maintained, so on integer-valued matrices every variant returns identical
/// prototypes and assignments for the same seed.
inline TrainingResult train(const DsomConfig& config, const DissimilarityMatrix& matrix,
                            const PriorGraph& graph, const EpochObserver& observer = {}) {
    config.validate();
    const std::int32_t n = matrix.size();
    const std::int32_t m = graph.num_models();
    if (m > n)
        throw std::invalid_argument("train: M = " + std::to_string(m) + " exceeds N = " +
                                    std::to_string(n) + " (M is too high relatively to N)");

    const std::vector<LevelOrder> levels = all_level_orders(graph);
    Rng rng(config.seed);
    std::vector<std::int32_t> prototypes = init_prototypes(n, m, rng);
    std::vector<std::int32_t> previous_prototypes = prototypes;
    std::vector<std::int32_t> assignments(static_cast<std::size_t>(n), -1);
    std::vector<std::int32_t> previous_assignments(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<std::int32_t>> clusters;
    std::vector<double> cluster_scratch;

    const bool uses_partial_sums = config.variant != Variant::brute;
    const bool incremental = config.variant == Variant::memory || config.variant == Variant::fast;
    const bool ordered_search =
        config.variant == Variant::earlystop || config.variant == Variant::fast;
    PartialSumTable psums(uses_partial_sums ? n : 1, uses_partial_sums ? m : 1);

    TrainingResult result;
    result.epoch_stats.reserve(static_cast<std::size_t>(config.schedule.epochs));

    for (std::int32_t l = 1; l <= config.schedule.epochs; ++l) {
        const std::vector<double> kappa = kernel_by_distance(config.schedule, graph, l);
        EpochStats stats;
        stats.epoch = l;

        AffectationOutcome aff = affectation_phase(assignments, previous_assignments, prototypes,
                                                   matrix, graph, levels);
        stats.nb_switch = aff.nb_switch;
        clusters = build_clusters(assignments, prototypes, m);

        if (uses_partial_sums) {
            if (!incremental) {
                psums.compute_full(clusters, matrix);
                stats.strategy = UpdateStrategy::block;
            } else {
                // Real-valued data accumulates rounding drift under repeated
                // add/subtract updates; a periodic full rebuild bounds it.
                // Integer-valued data is exact and never needs the rebuild.
                const bool forced_rebuild = !matrix.integer_valued() && l % 25 == 0;
                stats.strategy = choose_update_strategy(aff.nb_switch, n, config.ratio);
                if (forced_rebuild) {
                    psums.compute_full(clusters, matrix);
                    stats.strategy = UpdateStrategy::block;
                } else if (stats.strategy == UpdateStrategy::block) {
                    psums.refresh_changed(clusters, matrix, aff.cluster_changed);
                } else {
                    psums.apply_moves(aff.moves, matrix);
                }
            }
        }

        previous_prototypes = prototypes;
        for (std::int32_t j = 0; j < m; ++j) {
            const LevelOrder& lo = levels[static_cast<std::size_t>(j)];
            std::int32_t chosen;
            if (config.variant == Variant::brute) {
                chosen = select_prototype_brute(lo, kappa, clusters, matrix, cluster_scratch,
                                                &stats.terms_accumulated);
            } else if (ordered_search) {
                chosen = select_prototype_early_stop(lo, kappa, psums, clusters,
                                                     &stats.terms_accumulated,
                                                     config.inject_tie_fault);
            } else {
                chosen = select_prototype_partial(lo, kappa, psums, &stats.terms_accumulated);
            }
            prototypes[static_cast<std::size_t>(j)] = chosen;
            stats.candidates_evaluated += static_cast<std::uint64_t>(n);
        }

        result.epoch_stats.push_back(stats);
        if (observer) {
            const EpochSnapshot snapshot{l,
                                         prototypes,
                                         previous_prototypes,
                                         assignments,
                                         clusters,
                                         kappa,
                                         uses_partial_sums ? &psums : nullptr,
                                         result.epoch_stats.back()};
            observer(snapshot);
        }
        previous_assignments = assignments;
    }

    // Final assignment pass: the clusters reported to the caller are the ones
    // induced by the final prototypes.
    for (std::int32_t i = 0; i < n; ++i)
        assignments[static_cast<std::size_t>(i)] =
            best_matching_unit(i, prototypes, matrix, graph, levels);

    result.prototypes = std::move(prototypes);
    result.assignments = std::move(assignments);
    result.quantization_error = quantization_error(result.assignments, result.prototypes, matrix);
    return result;
}

} // namespace dsom
