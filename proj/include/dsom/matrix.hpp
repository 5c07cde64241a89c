#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsom/rng.hpp"

namespace dsom {

/// Whether every entry of a dissimilarity matrix is an exact integer.
/// Integer-valued matrices admit exact summation in 64-bit floating point
/// (all intermediate sums stay far below 2^53), which is what makes
/// bit-identical results across algorithm variants possible.
enum class ValueKind { integer_valued, real_valued };

/// Dense symmetric table of pairwise dissimilarities d(i, k) with zero
/// diagonal and nonnegative entries. Observations exist only as row/column
/// indices 0..n-1. Immutable after construction; safe to share across
/// concurrent readers.
class DissimilarityMatrix {
public:
    DissimilarityMatrix(std::int32_t n, std::vector<double> values, ValueKind kind)
        : n_(n), values_(std::move(values)), kind_(kind) {
        if (n <= 0) throw std::invalid_argument("DissimilarityMatrix: n must be positive");
        if (values_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
            throw std::invalid_argument("DissimilarityMatrix: value count does not match n*n");
        validate();
    }

    std::int32_t size() const { return n_; }
    ValueKind kind() const { return kind_; }
    bool integer_valued() const { return kind_ == ValueKind::integer_valued; }

    double at(std::int32_t i, std::int32_t k) const {
        return values_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
                       static_cast<std::size_t>(k)];
    }

    std::span<const double> row(std::int32_t i) const {
        return {values_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n_),
                static_cast<std::size_t>(n_)};
    }

    const std::vector<double>& values() const { return values_; }

    /// Classifies entries by scanning: integer_valued iff every entry is an
    /// exact integer.
    static ValueKind detect_kind(const std::vector<double>& values) {
        for (double v : values) {
            if (v != std::floor(v)) return ValueKind::real_valued;
        }
        return ValueKind::integer_valued;
    }

private:
    void validate() const {
        const auto n = static_cast<std::size_t>(n_);
        for (std::size_t i = 0; i < n; ++i) {
            if (values_[i * n + i] != 0.0)
                throw std::invalid_argument("DissimilarityMatrix: nonzero diagonal at index " +
                                            std::to_string(i));
            for (std::size_t k = i + 1; k < n; ++k) {
                const double a = values_[i * n + k];
                const double b = values_[k * n + i];
                if (!(a >= 0.0) || !std::isfinite(a))
                    throw std::invalid_argument("DissimilarityMatrix: negative or non-finite entry at (" +
                                                std::to_string(i) + "," + std::to_string(k) + ")");
                if (a != b)
                    throw std::invalid_argument("DissimilarityMatrix: asymmetry between (" +
                                                std::to_string(i) + "," + std::to_string(k) + ") and (" +
                                                std::to_string(k) + "," + std::to_string(i) + ")");
            }
        }
    }

    std::int32_t n_;
    std::vector<double> values_;
    ValueKind kind_;
};

/// A set of n points in dim-dimensional space.
struct PointSet {
    std::int32_t n = 0;
    std::int32_t dim = 0;
    std::vector<double> coords; // row-major n x dim

    double at(std::int32_t i, std::int32_t t) const {
        return coords[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim) +
                      static_cast<std::size_t>(t)];
    }
};

/// n points drawn uniformly from the unit square. Reproducible: a fixed seed
/// yields an identical point set on every platform.
inline PointSet generate_uniform_square(std::int32_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_uniform_square: n must be at least 1");
    PointSet ps;
    ps.n = n;
    ps.dim = 2;
    ps.coords.resize(static_cast<std::size_t>(n) * 2);
    Rng rng(seed);
    for (std::size_t i = 0; i < ps.coords.size(); ++i) ps.coords[i] = rng.next_double();
    return ps;
}

/// Pairwise squared Euclidean dissimilarities. No square root is taken; the
/// training algorithms only require a dissimilarity, not a metric. Each pair
/// is computed once and mirrored, so symmetry is exact by construction.
inline DissimilarityMatrix build_from_vectors(const PointSet& points) {
    if (points.n < 1) throw std::invalid_argument("build_from_vectors: empty point set");
    for (double c : points.coords) {
        if (!std::isfinite(c)) throw std::invalid_argument("build_from_vectors: non-finite coordinate");
    }
    const auto n = static_cast<std::size_t>(points.n);
    std::vector<double> values(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            double d = 0.0;
            for (std::int32_t t = 0; t < points.dim; ++t) {
                const double diff = points.at(static_cast<std::int32_t>(i), t) -
                                    points.at(static_cast<std::int32_t>(k), t);
                d += diff * diff;
            }
            values[i * n + k] = d;
            values[k * n + i] = d;
        }
    }
    return DissimilarityMatrix(points.n, std::move(values), ValueKind::real_valued);
}

/// Rounds scale*d(i,k) to the nearest integer, producing an integer-valued
/// matrix on which all algorithm variants are bit-for-bit comparable.
inline DissimilarityMatrix integerize(const DissimilarityMatrix& m, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("integerize: scale must be positive");
    const auto n = static_cast<std::size_t>(m.size());
    std::vector<double> values(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            const double v = std::nearbyint(scale * m.at(static_cast<std::int32_t>(i),
                                                         static_cast<std::int32_t>(k)));
            values[i * n + k] = v;
            values[k * n + i] = v;
        }
    }
    return DissimilarityMatrix(m.size(), std::move(values), ValueKind::integer_valued);
}

} // namespace dsom
