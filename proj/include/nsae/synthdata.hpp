#pragma once

// Deterministic identity-cluster generator standing in for real face
// vectors. Labels exist only for building evaluation trials.

#include "error.hpp"
#include "eval.hpp"
#include "random.hpp"
#include "vecmath.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nsae {

struct SynthConfig {
    std::size_t n_identities = 20;
    std::size_t samples_per_identity = 20;
    std::size_t dim = 64;
    // Std of the per-coordinate Gaussian perturbation added to the centroid.
    double session_noise = 0.2;
    std::uint64_t seed = 42;
};

struct LabeledDataset {
    Dataset vectors;
    std::vector<int> labels;
};

inline void validate(const SynthConfig& cfg)
{
    if (cfg.n_identities < 2 || cfg.samples_per_identity < 2 || cfg.dim < 2)
        fail(ErrorCode::InvalidConfig, "need >= 2 identities, >= 2 samples each and dim >= 2");
    if (!(cfg.session_noise >= 0.0) || !std::isfinite(cfg.session_noise))
        fail(ErrorCode::InvalidConfig, "session_noise must be finite and >= 0");
}

// Identity-major order: samples of identity 0 first, then identity 1, ...
inline LabeledDataset generate(const SynthConfig& cfg)
{
    validate(cfg);
    LabeledDataset ds;
    ds.vectors.reserve(cfg.n_identities * cfg.samples_per_identity);
    for (std::size_t id = 0; id < cfg.n_identities; ++id) {
        CounterRng centroid_rng(cfg.seed, streams::centroids + id);
        Vector centroid(cfg.dim);
        // A zero draw is practically impossible; redraw rather than divide by 0.
        do {
            for (double& c : centroid)
                c = centroid_rng.gaussian();
        } while (norm(centroid) < kZeroNormEpsilon);
        centroid = l2_normalize(centroid);

        CounterRng noise_rng(cfg.seed, streams::session + id);
        for (std::size_t s = 0; s < cfg.samples_per_identity; ++s) {
            Vector v(cfg.dim);
            do {
                for (std::size_t d = 0; d < cfg.dim; ++d)
                    v[d] = centroid[d] + cfg.session_noise * noise_rng.gaussian();
            } while (norm(v) < kZeroNormEpsilon);
            ds.vectors.push_back(l2_normalize(v));
            ds.labels.push_back(static_cast<int>(id));
        }
    }
    return ds;
}

namespace detail {

// Draws `count` distinct pairs (a < b) satisfying `keep` without replacement.
// Small pools are enumerated and partially shuffled; large ones use
// rejection sampling with a seen-set.
template <class Keep>
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t n, std::size_t pool,
                                                              std::size_t count, Keep keep,
                                                              CounterRng& rng)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (pool <= 2'000'000 || count * 4 > pool) {
        std::vector<std::pair<std::size_t, std::size_t>> all;
        all.reserve(pool);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                if (keep(a, b))
                    all.emplace_back(a, b);
        for (std::size_t i = 0; i < count; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(all.size() - i));
            std::swap(all[i], all[j]);
            out.push_back(all[i]);
        }
        return out;
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    while (out.size() < count) {
        auto a = static_cast<std::size_t>(rng.below(n));
        auto b = static_cast<std::size_t>(rng.below(n));
        if (a == b)
            continue;
        if (a > b)
            std::swap(a, b);
        if (keep(a, b) && seen.emplace(a, b).second)
            out.emplace_back(a, b);
    }
    return out;
}

} // namespace detail

// Matched trials first, then mismatched; each group sampled uniformly
// without replacement from all unordered pairs.
inline TrialList make_trials(std::span<const int> labels, std::size_t n_matched,
                             std::size_t n_mismatched, std::uint64_t seed)
{
    const std::size_t n = labels.size();
    std::size_t matched_pool = 0;
    {
        std::vector<std::size_t> per_label;
        std::vector<int> seen;
        for (int l : labels) {
            auto it = std::find(seen.begin(), seen.end(), l);
            if (it == seen.end()) {
                seen.push_back(l);
                per_label.push_back(1);
            } else {
                ++per_label[static_cast<std::size_t>(it - seen.begin())];
            }
        }
        for (std::size_t c : per_label)
            matched_pool += c * (c - 1) / 2;
    }
    const std::size_t total = n < 2 ? 0 : n * (n - 1) / 2;
    const std::size_t mismatched_pool = total - matched_pool;
    if (n_matched > matched_pool || n_mismatched > mismatched_pool)
        fail(ErrorCode::InsufficientPairs,
             "requested " + std::to_string(n_matched) + " matched / " +
                 std::to_string(n_mismatched) + " mismatched, available " +
                 std::to_string(matched_pool) + " / " + std::to_string(mismatched_pool));

    CounterRng matched_rng(seed, streams::trials);
    CounterRng mismatched_rng(seed, streams::trials + 1);
    TrialList trials;
    trials.reserve(n_matched + n_mismatched);
    for (auto [a, b] : detail::sample_pairs(
             n, matched_pool, n_matched,
             [&](std::size_t i, std::size_t j) { return labels[i] == labels[j]; }, matched_rng))
        trials.push_back({a, b, TrialLabel::Matched});
    for (auto [a, b] : detail::sample_pairs(
             n, mismatched_pool, n_mismatched,
             [&](std::size_t i, std::size_t j) { return labels[i] != labels[j]; },
             mismatched_rng))
        trials.push_back({a, b, TrialLabel::Mismatched});
    return trials;
}

inline TrialList make_trials(const LabeledDataset& ds, std::size_t n_matched,
                             std::size_t n_mismatched, std::uint64_t seed)
{
    return make_trials(ds.labels, n_matched, n_mismatched, seed);
}

} // namespace nsae
