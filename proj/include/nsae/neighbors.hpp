#pragma once

// Label-free neighbor selection over a cosine similarity matrix, and the
// expansion of a neighbor map into (input, target) training pairs.

#include "error.hpp"
#include "vecmath.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace nsae {

enum class SelectionMode { TopK, Threshold };

// neighbors[i] lists the neighbors of vector i, best first.
struct NeighborMap {
    SelectionMode mode = SelectionMode::TopK;
    // k for TopK, t for Threshold.
    double parameter = 0.0;
    std::vector<std::vector<std::size_t>> neighbors;
    // Highest-scoring j != i per row. Filled by the selectors; empty after a
    // map is loaded from disk until attach_top1 is called.
    std::vector<std::size_t> top1;

    std::size_t size() const noexcept { return neighbors.size(); }
};

struct TrainingPair {
    std::size_t input = 0;
    std::size_t target = 0;
    // Conventional (i, i) reconstruction pair.
    bool self = false;

    friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

enum class Fallback { SelfReconstruction, Top1 };

// n_times_k keeps all k selected neighbors; n_times_k_minus_1 drops the
// last-ranked one.
enum class CountConvention { NTimesK, NTimesKMinus1 };

namespace detail {

// Descending score, ascending index on ties.
struct RankOrder {
    std::span<const double> row;
    bool operator()(std::size_t a, std::size_t b) const noexcept
    {
        if (row[a] != row[b])
            return row[a] > row[b];
        return a < b;
    }
};

inline std::vector<std::size_t> candidates(std::size_t n, std::size_t self)
{
    std::vector<std::size_t> c;
    c.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
        if (j != self)
            c.push_back(j);
    return c;
}

inline std::size_t argmax_excluding_self(const SimilarityMatrix& sim, std::size_t i)
{
    const auto c = candidates(sim.size(), i);
    return *std::min_element(c.begin(), c.end(), RankOrder{sim.row(i)});
}

} // namespace detail

inline NeighborMap select_topk(const SimilarityMatrix& sim, std::size_t k)
{
    if (k < 1)
        fail(ErrorCode::InvalidK, "k must be >= 1");
    const std::size_t n = sim.size();
    if (n < 2)
        fail(ErrorCode::TooFewVectors, "need at least 2 vectors, got " + std::to_string(n));

    const std::size_t take = std::min(k, n - 1);
    NeighborMap map;
    map.mode = SelectionMode::TopK;
    map.parameter = static_cast<double>(take);
    map.neighbors.resize(n);
    map.top1.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto c = detail::candidates(n, i);
        std::partial_sort(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(take), c.end(),
                          detail::RankOrder{sim.row(i)});
        c.resize(take);
        map.top1[i] = c.front();
        map.neighbors[i] = std::move(c);
    }
    return map;
}

inline NeighborMap select_threshold(const SimilarityMatrix& sim, double t)
{
    if (!(t >= -1.0 && t <= 1.0))
        fail(ErrorCode::InvalidThreshold, "threshold " + std::to_string(t) + " outside [-1, 1]");
    const std::size_t n = sim.size();
    if (n < 2)
        fail(ErrorCode::TooFewVectors, "need at least 2 vectors, got " + std::to_string(n));

    NeighborMap map;
    map.mode = SelectionMode::Threshold;
    map.parameter = t;
    map.neighbors.resize(n);
    map.top1.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = sim.row(i);
        std::vector<std::size_t> picked;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && row[j] >= t)
                picked.push_back(j);
        std::sort(picked.begin(), picked.end(), detail::RankOrder{row});
        map.top1[i] = detail::argmax_excluding_self(sim, i);
        map.neighbors[i] = std::move(picked);
    }
    return map;
}

inline void attach_top1(NeighborMap& map, const SimilarityMatrix& sim)
{
    if (sim.size() != map.size())
        fail(ErrorCode::DimensionMismatch, "similarity matrix size " + std::to_string(sim.size()) +
                                               " != neighbor map size " +
                                               std::to_string(map.size()));
    map.top1.resize(map.size());
    for (std::size_t i = 0; i < map.size(); ++i)
        map.top1[i] = detail::argmax_excluding_self(sim, i);
}

// Structural checks shared by the selectors' outputs and the file loader.
inline void validate(const NeighborMap& map)
{
    const std::size_t n = map.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = map.neighbors[i];
        for (std::size_t j : row) {
            if (j == i)
                fail(ErrorCode::InvalidNeighborMap, "row " + std::to_string(i) + " lists itself");
            if (j >= n)
                fail(ErrorCode::InvalidNeighborMap,
                     "row " + std::to_string(i) + " references index " + std::to_string(j) +
                         " >= " + std::to_string(n));
        }
        auto sorted = row;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            fail(ErrorCode::InvalidNeighborMap, "row " + std::to_string(i) + " repeats an index");
        if (map.mode == SelectionMode::TopK) {
            const auto expect = static_cast<std::size_t>(map.parameter);
            if (row.size() != std::min(expect, n - 1))
                fail(ErrorCode::InvalidNeighborMap,
                     "row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                         " neighbors, TopK expects " + std::to_string(std::min(expect, n - 1)));
        }
    }
    if (!map.top1.empty() && map.top1.size() != n)
        fail(ErrorCode::InvalidNeighborMap, "top1 length does not match row count");
}

inline NeighborMap apply_count_convention(NeighborMap map, CountConvention convention)
{
    if (convention == CountConvention::NTimesK)
        return map;
    if (map.mode != SelectionMode::TopK)
        fail(ErrorCode::InvalidConfig, "count convention applies to TopK maps only");
    if (map.parameter < 2.0)
        fail(ErrorCode::InvalidK, "n_times_k_minus_1 needs k >= 2");
    for (auto& row : map.neighbors)
        row.pop_back();
    map.parameter -= 1.0;
    return map;
}

inline std::vector<TrainingPair> self_pairs(std::size_t n)
{
    std::vector<TrainingPair> pairs(n);
    for (std::size_t i = 0; i < n; ++i)
        pairs[i] = {i, i, true};
    return pairs;
}

inline std::vector<TrainingPair> build_training_pairs(const NeighborMap& map, Fallback fallback)
{
    validate(map);
    std::vector<TrainingPair> pairs;
    for (std::size_t i = 0; i < map.size(); ++i) {
        const auto& row = map.neighbors[i];
        if (!row.empty()) {
            for (std::size_t j : row)
                pairs.push_back({i, j, false});
            continue;
        }
        if (fallback == Fallback::SelfReconstruction) {
            pairs.push_back({i, i, true});
        } else {
            if (map.top1.empty())
                fail(ErrorCode::InvalidNeighborMap,
                     "row " + std::to_string(i) +
                         " is empty and Top1 fallback needs scores (call attach_top1)");
            pairs.push_back({i, map.top1[i], false});
        }
    }
    return pairs;
}

} // namespace nsae
