#pragma once

// End-to-end experiment: select neighbors, train, embed, score, evaluate.

#include "embed.hpp"
#include "eval.hpp"
#include "neighbors.hpp"
#include "net.hpp"
#include "synthdata.hpp"
#include "trainer.hpp"
#include "vecmath.hpp"

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace nsae {

struct PipelineConfig {
    std::vector<std::size_t> arch{64, 32, 16, 32, 64};
    TrainConfig train;
    // Exactly one of k / threshold selects NSAE training; neither selects the
    // conventional self-reconstruction baseline.
    std::optional<std::size_t> k;
    std::optional<double> threshold;
    CountConvention convention = CountConvention::NTimesK;
    Fallback fallback = Fallback::Top1;
    EmbedOptions embed;
    ZeroVectorPolicy zero_policy = ZeroVectorPolicy::ScoreZero;
};

struct PipelineResult {
    std::size_t n_pairs = 0;
    TrainReport train;
    ScoreSet scores;
    EvalReport report;
};

inline std::vector<TrainingPair> select_pairs(const Dataset& data, const PipelineConfig& cfg)
{
    if (cfg.k && cfg.threshold)
        fail(ErrorCode::InvalidConfig, "choose either k or threshold, not both");
    if (!cfg.k && !cfg.threshold)
        return self_pairs(data.size());
    const auto sim = pairwise_cosine(data, cfg.train.workers);
    auto map = cfg.k ? apply_count_convention(select_topk(sim, *cfg.k), cfg.convention)
                     : select_threshold(sim, *cfg.threshold);
    return build_training_pairs(map, cfg.fallback);
}

// "nsae-k5", "nsae-t0.2" or "baseline".
inline std::string source_tag(const PipelineConfig& cfg)
{
    if (cfg.k)
        return "nsae-k" + std::to_string(*cfg.k);
    if (cfg.threshold) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "nsae-t%g", *cfg.threshold);
        return buf;
    }
    return "baseline";
}

inline PipelineResult run_pipeline(const Dataset& data, const TrialList& trials,
                                   const PipelineConfig& cfg)
{
    PipelineResult out;
    const auto pairs = select_pairs(data, cfg);
    out.n_pairs = pairs.size();
    TrainConfig train = cfg.train;
    train.mode = cfg.k || cfg.threshold ? TrainMode::NeighborReconstruction
                                        : TrainMode::SelfReconstruction;
    auto result = train_nsae(data, pairs, cfg.arch, train);
    out.train = std::move(result.report);
    EmbedOptions embed = cfg.embed;
    embed.workers = cfg.train.workers;
    const auto embeddings = extract_all(result.params, data, embed);
    out.scores = score_trials(embeddings, trials, {cfg.train.workers, cfg.zero_policy});
    out.scores.source = source_tag(cfg);
    out.report = compute_eer(out.scores, trials);
    return out;
}

// Desk-scale benchmark: small enough for CI, large enough to show the
// neighbor-reconstruction effect.
struct DeskPreset {
    SynthConfig synth;
    PipelineConfig pipeline;
    std::size_t n_matched = 300;
    std::size_t n_mismatched = 300;
};

inline DeskPreset desk_preset(std::uint64_t seed = 42)
{
    DeskPreset p;
    p.synth.n_identities = 20;
    p.synth.samples_per_identity = 20;
    p.synth.dim = 64;
    p.synth.session_noise = 0.2;
    p.synth.seed = seed;
    p.pipeline.arch = {64, 32, 16, 32, 64};
    p.pipeline.train.epochs = 100;
    p.pipeline.train.batch_size = 20;
    p.pipeline.train.schedule = ConstantWithDecay{15.0, 0.0002};
    p.pipeline.train.seed = seed;
    p.pipeline.train.patience = 20;
    p.pipeline.k = 5;
    return p;
}

} // namespace nsae
