#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsom/matrix.hpp"
#include "dsom/topology.hpp"
#include "dsom/training.hpp"

namespace dsom {

struct TimingRecord {
    Variant variant = Variant::fast;
    std::int32_t n = 0;
    std::int32_t m = 0;
    std::int32_t epochs = 0;
    std::uint64_t seed = 0;
    std::int32_t repeats = 0;
    double wall_seconds = 0.0;
    double relative_sd = 0.0;
};

inline constexpr const char* timing_csv_header = "variant,N,M,L,seed,repeats,wall_seconds,relative_sd";

namespace detail {

/// Shortest decimal form that parses back to the same double.
inline std::string format_compact(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Timed sections are strictly sequential; nested or concurrent timing would
// contaminate the measurements.
class TimingSectionGuard {
public:
    TimingSectionGuard() {
        if (flag().exchange(true))
            throw std::logic_error("benchmark: timed sections must not run concurrently");
    }
    ~TimingSectionGuard() { flag().store(false); }
    TimingSectionGuard(const TimingSectionGuard&) = delete;
    TimingSectionGuard& operator=(const TimingSectionGuard&) = delete;

private:
    static std::atomic<bool>& flag() {
        static std::atomic<bool> f{false};
        return f;
    }
};

} // namespace detail

inline std::string timing_csv_line(const TimingRecord& r) {
    std::string line;
    line += variant_name(r.variant);
    line += ',';
    line += std::to_string(r.n);
    line += ',';
    line += std::to_string(r.m);
    line += ',';
    line += std::to_string(r.epochs);
    line += ',';
    line += std::to_string(r.seed);
    line += ',';
    line += std::to_string(r.repeats);
    line += ',';
    line += detail::format_compact(r.wall_seconds);
    line += ',';
    line += detail::format_compact(r.relative_sd);
    return line;
}

/// Times one training configuration: one untimed warm-up run, then `repeats`
/// timed runs whose wall times are averaged. Runs shorter than 50 ms are
/// executed in batches and the batch time divided. Every run must produce the
/// same prototypes and assignments as the warm-up run; a mismatch aborts the
/// benchmark because it would mean the algorithm is not deterministic.
inline TimingRecord time_variant(const DsomConfig& config, const DissimilarityMatrix& matrix,
                                 const PriorGraph& graph, std::int32_t repeats) {
    if (repeats < 1) throw std::invalid_argument("time_variant: repeats must be at least 1");
    detail::TimingSectionGuard guard;
    using clock = std::chrono::steady_clock;

    const auto warm_start = clock::now();
    const TrainingResult reference = train(config, matrix, graph);
    const double warm_seconds = std::chrono::duration<double>(clock::now() - warm_start).count();

    const std::int32_t batch =
        warm_seconds >= 0.05 ? 1
                             : static_cast<std::int32_t>(std::ceil(0.05 / std::max(warm_seconds, 1e-9)));

    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(repeats));
    for (std::int32_t r = 0; r < repeats; ++r) {
        const auto t0 = clock::now();
        for (std::int32_t b = 0; b < batch; ++b) {
            const TrainingResult run = train(config, matrix, graph);
            if (run.prototypes != reference.prototypes || run.assignments != reference.assignments)
                throw std::runtime_error("time_variant: non-deterministic result across repeats");
        }
        const double t = std::chrono::duration<double>(clock::now() - t0).count();
        samples.push_back(t / static_cast<double>(batch));
    }

    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size());

    TimingRecord record;
    record.variant = config.variant;
    record.n = matrix.size();
    record.m = graph.num_models();
    record.epochs = config.schedule.epochs;
    record.seed = config.seed;
    record.repeats = repeats;
    record.wall_seconds = mean;
    record.relative_sd = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
    return record;
}

struct Divergence {
    std::uint64_t seed = 0;
    Variant reference = Variant::brute;
    Variant other = Variant::fast;
    std::int32_t first_epoch = -1; // -1: only the final assignment pass differs
    std::string detail;
};

struct EquivalenceReport {
    std::int32_t runs_compared = 0;
    std::vector<Divergence> divergences;

    bool identical() const { return divergences.empty(); }

    std::string to_text() const {
        std::string out;
        out += "equivalence: " + std::to_string(runs_compared) + " run pairs compared, " +
               std::to_string(divergences.size()) + " divergence(s)\n";
        for (const auto& d : divergences) {
            out += "  seed " + std::to_string(d.seed) + ": " + variant_name(d.reference) + " vs " +
                   variant_name(d.other);
            if (d.first_epoch >= 0)
                out += " first differ at epoch " + std::to_string(d.first_epoch);
            else
                out += " differ after the final assignment pass";
            out += ": " + d.detail + "\n";
        }
        return out;
    }
};

namespace detail {

struct EpochTrace {
    std::vector<std::vector<std::int32_t>> prototypes_per_epoch;
};

inline EpochTrace trace_epochs(const DsomConfig& config, const DissimilarityMatrix& matrix,
                               const PriorGraph& graph) {
    EpochTrace trace;
    train(config, matrix, graph,
          [&trace](const EpochSnapshot& snap) { trace.prototypes_per_epoch.push_back(snap.prototypes); });
    return trace;
}

/// Re-runs both variants epoch by epoch and pinpoints where their prototype
/// lists first part ways.
inline Divergence localize_divergence(const DsomConfig& base, Variant ref, Variant other,
                                      std::uint64_t seed, const DissimilarityMatrix& matrix,
                                      const PriorGraph& graph) {
    DsomConfig ca = base;
    ca.variant = ref;
    ca.seed = seed;
    DsomConfig cb = base;
    cb.variant = other;
    cb.seed = seed;
    const EpochTrace ta = trace_epochs(ca, matrix, graph);
    const EpochTrace tb = trace_epochs(cb, matrix, graph);

    Divergence div;
    div.seed = seed;
    div.reference = ref;
    div.other = other;
    for (std::size_t e = 0; e < ta.prototypes_per_epoch.size(); ++e) {
        const auto& pa = ta.prototypes_per_epoch[e];
        const auto& pb = tb.prototypes_per_epoch[e];
        if (pa != pb) {
            div.first_epoch = static_cast<std::int32_t>(e) + 1;
            for (std::size_t j = 0; j < pa.size(); ++j) {
                if (pa[j] != pb[j]) {
                    div.detail = "model " + std::to_string(j) + " selected prototype " +
                                 std::to_string(pa[j]) + " vs " + std::to_string(pb[j]);
                    break;
                }
            }
            return div;
        }
    }
    div.first_epoch = -1;
    div.detail = "per-epoch prototypes agree; results differ in the final pass";
    return div;
}

} // namespace detail

/// Runs every requested variant for every seed and compares prototypes and
/// assignments pairwise against the first variant. Divergences are report
/// content, not errors; each one is localized to the first epoch at which the
/// prototype lists differ.
inline EquivalenceReport equivalence_check(const DissimilarityMatrix& matrix, const PriorGraph& graph,
                                           const std::vector<std::uint64_t>& seeds,
                                           const std::vector<Variant>& variants,
                                           const DsomConfig& base_config) {
    EquivalenceReport report;
    for (std::uint64_t seed : seeds) {
        std::vector<TrainingResult> results;
        results.reserve(variants.size());
        for (Variant v : variants) {
            DsomConfig config = base_config;
            config.variant = v;
            config.seed = seed;
            results.push_back(train(config, matrix, graph));
        }
        for (std::size_t v = 1; v < variants.size(); ++v) {
            ++report.runs_compared;
            if (results[v].prototypes != results[0].prototypes ||
                results[v].assignments != results[0].assignments) {
                report.divergences.push_back(detail::localize_divergence(
                    base_config, variants[0], variants[v], seed, matrix, graph));
            }
        }
        if (variants.size() == 1) ++report.runs_compared;
    }
    return report;
}

/// Mean squared prediction error divided by the variance of the observed
/// values: 0 for perfect prediction, 1 for predicting the mean.
inline double nmse(const std::vector<double>& predicted, const std::vector<double>& actual) {
    if (predicted.size() != actual.size() || actual.empty())
        throw std::invalid_argument("nmse: need equal-length nonempty inputs");
    double mean = 0.0;
    for (double a : actual) mean += a;
    mean /= static_cast<double>(actual.size());
    double var = 0.0, mse = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        var += (actual[i] - mean) * (actual[i] - mean);
        mse += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
    }
    var /= static_cast<double>(actual.size());
    mse /= static_cast<double>(actual.size());
    if (var == 0.0 || var <= 1e-24 * mean * mean)
        throw std::invalid_argument("nmse: observed values have zero variance");
    return mse / var;
}

struct CostModelFit {
    enum class Model { loglog, quadratic };
    Model model = Model::loglog;
    // loglog: log T = alpha log N + beta log M + gamma
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    // quadratic: T = delta N^2 + tau N M^2
    double delta = 0.0, tau = 0.0;
    double nmse = 0.0;
};

namespace detail {

inline void check_fit_design(const std::vector<TimingRecord>& records, const char* who) {
    if (records.size() < 4)
        throw std::invalid_argument(std::string(who) + ": need at least 4 records");
    std::vector<std::int32_t> ns, ms;
    for (const auto& r : records) {
        ns.push_back(r.n);
        ms.push_back(r.m);
        if (!(r.wall_seconds > 0.0))
            throw std::invalid_argument(std::string(who) + ": wall_seconds must be positive");
    }
    auto distinct = [](std::vector<std::int32_t> v) {
        std::sort(v.begin(), v.end());
        return std::unique(v.begin(), v.end()) - v.begin();
    };
    if (distinct(ns) < 2 || distinct(ms) < 2)
        throw std::invalid_argument(std::string(who) +
                                    ": records must span at least two distinct N and two distinct M");
}

/// Gaussian elimination with partial pivoting for the tiny normal-equation
/// systems used here. Throws on (near-)singular systems.
template <std::size_t Dim>
inline void solve_linear(double a[Dim][Dim], double b[Dim], const char* who) {
    for (std::size_t col = 0; col < Dim; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < Dim; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (pivot != col) {
            for (std::size_t c = 0; c < Dim; ++c) std::swap(a[col][c], a[pivot][c]);
            std::swap(b[col], b[pivot]);
        }
        if (std::abs(a[col][col]) < 1e-12)
            throw std::invalid_argument(std::string(who) + ": degenerate design matrix");
        for (std::size_t r = col + 1; r < Dim; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < Dim; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = Dim; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < Dim; ++c) s -= a[i][c] * b[c];
        b[i] = s / a[i][i];
    }
}

} // namespace detail

/// Ordinary least squares of log T on (log N, log M, 1). The reported NMSE is
/// computed on the back-transformed predictions, i.e. in seconds, not in log
/// space.
inline CostModelFit fit_loglog(const std::vector<TimingRecord>& records) {
    detail::check_fit_design(records, "fit_loglog");
    double a[3][3] = {};
    double b[3] = {};
    for (const auto& r : records) {
        const double x[3] = {std::log(static_cast<double>(r.n)), std::log(static_cast<double>(r.m)),
                             1.0};
        const double y = std::log(r.wall_seconds);
        for (int p = 0; p < 3; ++p) {
            for (int q = 0; q < 3; ++q) a[p][q] += x[p] * x[q];
            b[p] += x[p] * y;
        }
    }
    detail::solve_linear<3>(a, b, "fit_loglog");

    CostModelFit fit;
    fit.model = CostModelFit::Model::loglog;
    fit.alpha = b[0];
    fit.beta = b[1];
    fit.gamma = b[2];
    std::vector<double> predicted, actual;
    for (const auto& r : records) {
        predicted.push_back(std::exp(fit.alpha * std::log(static_cast<double>(r.n)) +
                                     fit.beta * std::log(static_cast<double>(r.m)) + fit.gamma));
        actual.push_back(r.wall_seconds);
    }
    fit.nmse = nmse(predicted, actual);
    return fit;
}

/// Least squares of T on (N^2, N M^2) with nonnegative coefficients. The
/// two-variable nonnegative problem is solved exactly by case analysis: the
/// unconstrained solution if it is feasible, otherwise the best single-term
/// fit clamped at zero.
inline CostModelFit fit_quadratic(const std::vector<TimingRecord>& records) {
    detail::check_fit_design(records, "fit_quadratic");
    double s11 = 0.0, s12 = 0.0, s22 = 0.0, sy1 = 0.0, sy2 = 0.0;
    for (const auto& r : records) {
        const double x1 = static_cast<double>(r.n) * static_cast<double>(r.n);
        const double x2 = static_cast<double>(r.n) * static_cast<double>(r.m) *
                          static_cast<double>(r.m);
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        sy1 += x1 * r.wall_seconds;
        sy2 += x2 * r.wall_seconds;
    }
    const double det = s11 * s22 - s12 * s12;
    if (!(s11 > 0.0) || !(s22 > 0.0) || std::abs(det) < 1e-12 * s11 * s22)
        throw std::invalid_argument("fit_quadratic: degenerate design matrix");

    auto sse = [&](double delta, double tau) {
        double e = 0.0;
        for (const auto& r : records) {
            const double x1 = static_cast<double>(r.n) * static_cast<double>(r.n);
            const double x2 = static_cast<double>(r.n) * static_cast<double>(r.m) *
                              static_cast<double>(r.m);
            const double diff = delta * x1 + tau * x2 - r.wall_seconds;
            e += diff * diff;
        }
        return e;
    };

    double delta = (sy1 * s22 - sy2 * s12) / det;
    double tau = (sy2 * s11 - sy1 * s12) / det;
    if (delta < 0.0 || tau < 0.0) {
        const double tau_only = std::max(0.0, sy2 / s22);
        const double delta_only = std::max(0.0, sy1 / s11);
        if (sse(0.0, tau_only) <= sse(delta_only, 0.0)) {
            delta = 0.0;
            tau = tau_only;
        } else {
            delta = delta_only;
            tau = 0.0;
        }
    }

    CostModelFit fit;
    fit.model = CostModelFit::Model::quadratic;
    fit.delta = delta;
    fit.tau = tau;
    std::vector<double> predicted, actual;
    for (const auto& r : records) {
        const double x1 = static_cast<double>(r.n) * static_cast<double>(r.n);
        const double x2 = static_cast<double>(r.n) * static_cast<double>(r.m) *
                          static_cast<double>(r.m);
        predicted.push_back(delta * x1 + tau * x2);
        actual.push_back(r.wall_seconds);
    }
    fit.nmse = nmse(predicted, actual);
    return fit;
}

} // namespace dsom
