#pragma once

// Verification scoring: cosine trial scores, FAR/FRR sweep with an
// interpolated equal error rate, and weighted score-level fusion.

#include "error.hpp"
#include "parallel.hpp"
#include "vecmath.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsae {

enum class TrialLabel : std::uint8_t { Mismatched = 0, Matched = 1 };

struct Trial {
    std::size_t a = 0;
    std::size_t b = 0;
    TrialLabel label = TrialLabel::Mismatched;

    friend bool operator==(const Trial&, const Trial&) = default;
};

using TrialList = std::vector<Trial>;

struct ScoreSet {
    std::vector<double> scores;
    std::string source;
    // Trials scored 0 because an embedding was all-zero (ScoreZero policy).
    std::size_t zero_vector_trials = 0;
};

struct RocPoint {
    double far = 0.0;
    double frr = 0.0;
    double threshold = 0.0;
};

struct EvalReport {
    double eer = 0.0;
    double eer_threshold = 0.0;
    double accuracy = 0.0;
    std::size_t n_matched = 0;
    std::size_t n_mismatched = 0;
    // One point per distinct score, ascending threshold, plus a final point
    // just above the maximum score (FAR 0, FRR 1).
    std::vector<RocPoint> roc;
};

inline void check_trial_indices(const TrialList& trials, std::size_t n)
{
    for (std::size_t t = 0; t < trials.size(); ++t)
        if (trials[t].a >= n || trials[t].b >= n)
            fail(ErrorCode::IndexOutOfRange, "trial " + std::to_string(t) +
                                                 " references index >= " + std::to_string(n));
}

// A ReLU bottleneck can legitimately map an input to the zero vector. Error
// rejects such trials; ScoreZero gives them the neutral score 0 and counts them.
enum class ZeroVectorPolicy { Error, ScoreZero };

struct ScoreOptions {
    unsigned workers = 1;
    ZeroVectorPolicy zero_policy = ZeroVectorPolicy::Error;
};

inline ScoreSet score_trials(const Dataset& embeddings, const TrialList& trials,
                             const ScoreOptions& opts = {})
{
    check_trial_indices(trials, embeddings.size());
    ScoreSet out;
    out.source = "cosine";
    out.scores.resize(trials.size());
    std::vector<char> zero(trials.size(), 0);
    parallel_for(trials.size(), opts.workers, [&](std::size_t t) {
        const auto& a = embeddings[trials[t].a];
        const auto& b = embeddings[trials[t].b];
        if (opts.zero_policy == ZeroVectorPolicy::ScoreZero && a.size() == b.size() &&
            (norm(a) < kZeroNormEpsilon || norm(b) < kZeroNormEpsilon)) {
            out.scores[t] = 0.0;
            zero[t] = 1;
            return;
        }
        try {
            out.scores[t] = cosine_score(a, b);
        } catch (const Error& e) {
            throw Error(e.code(), "trial " + std::to_string(t) + ": " + e.what());
        }
    });
    out.zero_vector_trials = static_cast<std::size_t>(std::count(zero.begin(), zero.end(), 1));
    return out;
}

// FAR(t) = fraction of Mismatched scores >= t; FRR(t) = fraction of Matched
// scores < t. The EER is read at the first ROC point with FAR <= FRR,
// interpolated linearly from the previous point when the crossing is not exact.
inline EvalReport compute_eer(std::span<const double> scores, std::span<const TrialLabel> labels)
{
    if (scores.size() != labels.size())
        fail(ErrorCode::LengthMismatch, std::to_string(scores.size()) + " scores for " +
                                            std::to_string(labels.size()) + " trials");
    require_finite(scores, "score set");

    EvalReport r;
    for (auto l : labels)
        (l == TrialLabel::Matched ? r.n_matched : r.n_mismatched)++;
    if (r.n_matched == 0 || r.n_mismatched == 0)
        fail(ErrorCode::SingleClass, "EER needs both matched and mismatched trials");

    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });

    const double nm = static_cast<double>(r.n_matched);
    const double nn = static_cast<double>(r.n_mismatched);
    std::size_t matched_below = 0;
    std::size_t mismatched_below = 0;
    for (std::size_t k = 0; k < idx.size();) {
        const double t = scores[idx[k]];
        r.roc.push_back({(nn - static_cast<double>(mismatched_below)) / nn,
                         static_cast<double>(matched_below) / nm, t});
        for (; k < idx.size() && scores[idx[k]] == t; ++k)
            (labels[idx[k]] == TrialLabel::Matched ? matched_below : mismatched_below)++;
    }
    const double top = scores[idx.back()];
    r.roc.push_back({0.0, 1.0, std::nextafter(top, std::numeric_limits<double>::infinity())});

    r.accuracy = 0.0;
    for (const auto& p : r.roc) {
        const double correct = nm * (1.0 - p.frr) + nn * (1.0 - p.far);
        r.accuracy = std::max(r.accuracy, correct / (nm + nn));
    }

    std::size_t i = 0;
    while (r.roc[i].far > r.roc[i].frr)
        ++i;
    const auto& hi = r.roc[i];
    if (hi.far == hi.frr || i == 0) {
        r.eer = hi.far;
        r.eer_threshold = hi.threshold;
        return r;
    }
    const auto& lo = r.roc[i - 1];
    const double d_lo = lo.far - lo.frr;
    const double d_hi = hi.far - hi.frr;
    const double alpha = d_lo / (d_lo - d_hi);
    r.eer = lo.far + alpha * (hi.far - lo.far);
    r.eer_threshold = lo.threshold + alpha * (hi.threshold - lo.threshold);
    return r;
}

inline std::vector<TrialLabel> labels_of(const TrialList& trials)
{
    std::vector<TrialLabel> labels(trials.size());
    std::transform(trials.begin(), trials.end(), labels.begin(),
                   [](const Trial& t) { return t.label; });
    return labels;
}

inline EvalReport compute_eer(const ScoreSet& s, const TrialList& trials)
{
    const auto labels = labels_of(trials);
    return compute_eer(s.scores, labels);
}

enum class Normalization { MinMax, ZScore, None };

struct FusionConfig {
    double w1 = 0.5;
    double w2 = 0.5;
    Normalization normalization = Normalization::MinMax;
};

inline std::vector<double> normalize_scores(std::span<const double> s, Normalization mode)
{
    std::vector<double> out(s.begin(), s.end());
    if (mode == Normalization::None || s.empty())
        return out;
    if (mode == Normalization::MinMax) {
        const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
        const double range = *hi - *lo;
        if (!(range > 0.0))
            fail(ErrorCode::DegenerateNormalization, "constant score set under MinMax");
        for (double& x : out)
            x = (x - *lo) / range;
        return out;
    }
    const double n = static_cast<double>(s.size());
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
    double var = 0.0;
    for (double x : s)
        var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 0.0))
        fail(ErrorCode::DegenerateNormalization, "constant score set under ZScore");
    for (double& x : out)
        x = (x - mean) / sd;
    return out;
}

inline void validate(const FusionConfig& cfg)
{
    if (!(cfg.w1 >= 0.0 && cfg.w2 >= 0.0) || std::abs(cfg.w1 + cfg.w2 - 1.0) > 1e-9)
        fail(ErrorCode::InvalidConfig, "fusion weights must be >= 0 and sum to 1");
}

inline ScoreSet fuse_scores(const ScoreSet& s1, const ScoreSet& s2, const FusionConfig& cfg)
{
    validate(cfg);
    if (s1.scores.size() != s2.scores.size())
        fail(ErrorCode::LengthMismatch, "score sets of length " + std::to_string(s1.scores.size()) +
                                            " and " + std::to_string(s2.scores.size()));
    const auto n1 = normalize_scores(s1.scores, cfg.normalization);
    const auto n2 = normalize_scores(s2.scores, cfg.normalization);
    ScoreSet out;
    out.source = "fusion(" + s1.source + "," + s2.source + ")";
    out.scores.resize(n1.size());
    for (std::size_t t = 0; t < n1.size(); ++t)
        out.scores[t] = cfg.w1 * n1[t] + cfg.w2 * n2[t];
    return out;
}

struct SweepRow {
    std::string approach;
    std::string parameter;
    EvalReport report;
};

// Aligned text table in the order given: approach, parameter, EER (%).
inline std::string sweep_report(std::span<const SweepRow> rows, std::string_view parameter_name)
{
    std::size_t w_app = std::string_view("Approach").size();
    std::size_t w_par = parameter_name.size();
    for (const auto& r : rows) {
        w_app = std::max(w_app, r.approach.size());
        w_par = std::max(w_par, r.parameter.size());
    }
    auto pad = [](std::string_view s, std::size_t w) {
        std::string out(s);
        out.resize(std::max(w, s.size()), ' ');
        return out;
    };
    std::string out = pad("Approach", w_app) + "  " + pad(parameter_name, w_par) + "  EER(%)\n";
    for (const auto& r : rows) {
        char eer[32];
        std::snprintf(eer, sizeof eer, "%.2f", 100.0 * r.report.eer);
        out += pad(r.approach, w_app) + "  " + pad(r.parameter, w_par) + "  " + eer + "\n";
    }
    return out;
}

} // namespace nsae
