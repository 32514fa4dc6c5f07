#pragma once

#include "error.hpp"
#include "neighbors.hpp"
#include "net.hpp"
#include "parallel.hpp"
#include "random.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nsae {

enum class TrainMode { NeighborReconstruction, SelfReconstruction };

struct TrainConfig {
    std::size_t epochs = 400;
    std::size_t batch_size = 100;
    LrSchedule schedule = LogDecay{};
    std::uint64_t seed = 0;
    // Stop once the best epoch loss has not improved by min_improvement for
    // this many consecutive epochs.
    std::size_t patience = 20;
    double min_improvement = 1e-7;
    TrainMode mode = TrainMode::NeighborReconstruction;
    unsigned workers = 1;

    // Resume: start from these parameters at start_epoch instead of a fresh
    // initialization. The shuffle stream depends only on (seed, epoch).
    std::optional<AutoencoderParams> initial;
    std::size_t start_epoch = 0;

    // Called after every epoch with (epoch, mean loss, lr).
    std::function<void(std::size_t, double, double)> on_epoch;
    // Called every checkpoint_every epochs (and never when 0).
    std::size_t checkpoint_every = 50;
    std::function<void(std::size_t, const AutoencoderParams&)> on_checkpoint;
};

struct TrainReport {
    std::vector<double> loss_per_epoch;
    std::vector<double> lr_per_epoch;
    std::size_t epochs_run = 0;
    bool stopped_early = false;
    double final_lr = 0.0;

    friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

struct TrainResult {
    AutoencoderParams params;
    TrainReport report;
};

// Pairs per gradient chunk. The batch gradient is the in-order sum of chunk
// sums, so the result is the same whatever the worker count.
inline constexpr std::size_t kGradientChunk = 8;

namespace detail {

inline void check_training_inputs(const Dataset& data, std::span<const TrainingPair> pairs,
                                  std::size_t input_dim, const TrainConfig& cfg)
{
    if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.patience < 1)
        fail(ErrorCode::InvalidConfig, "epochs, batch_size and patience must be >= 1");
    if (cfg.start_epoch >= cfg.epochs)
        fail(ErrorCode::InvalidConfig, "start_epoch must be below epochs");
    validate(cfg.schedule);
    if (pairs.empty())
        fail(ErrorCode::EmptyPairs, "no training pairs");
    for (std::size_t t = 0; t < pairs.size(); ++t)
        if (pairs[t].input >= data.size() || pairs[t].target >= data.size())
            fail(ErrorCode::IndexOutOfRange, "pair " + std::to_string(t) + " references index >= " +
                                                 std::to_string(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data[i].size() != input_dim)
            fail(ErrorCode::DimensionMismatch, "vector " + std::to_string(i) + " has dim " +
                                                   std::to_string(data[i].size()) +
                                                   ", architecture expects " +
                                                   std::to_string(input_dim));
}

} // namespace detail

inline TrainResult train_nsae(const Dataset& data, std::span<const TrainingPair> pairs,
                              std::span<const std::size_t> arch, const TrainConfig& cfg)
{
    std::vector<TrainingPair> source;
    if (cfg.mode == TrainMode::SelfReconstruction)
        source = self_pairs(data.size());
    else
        source.assign(pairs.begin(), pairs.end());

    validate_architecture(arch);
    detail::check_training_inputs(data, source, arch.front(), cfg);

    AutoencoderParams params = cfg.initial ? *cfg.initial : init_autoencoder(arch, cfg.seed);
    validate(params);
    if (!std::equal(arch.begin(), arch.end(), params.layer_sizes.begin(), params.layer_sizes.end()))
        fail(ErrorCode::ShapeMismatch, "initial parameters do not match the architecture");

    TrainReport report;
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    const std::size_t max_chunks = (cfg.batch_size + kGradientChunk - 1) / kGradientChunk;
    std::vector<Gradients> chunk_grads(max_chunks, Gradients::zeros_like(params));
    std::vector<double> chunk_loss(max_chunks);
    Gradients batch_grad = Gradients::zeros_like(params);

    for (std::size_t epoch = cfg.start_epoch; epoch < cfg.epochs; ++epoch) {
        // Each epoch permutes the original order, so resuming at any epoch
        // replays the same stream.
        std::vector<TrainingPair> order = source;
        CounterRng rng(cfg.seed, streams::shuffle + epoch);
        shuffle(std::span<TrainingPair>(order), rng);
        const double lr = lr_at(cfg.schedule, epoch, cfg.epochs);

        double epoch_loss = 0.0;
        for (std::size_t start = 0, batch = 0; start < order.size();
             start += cfg.batch_size, ++batch) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - start);
            const std::size_t chunks = (count + kGradientChunk - 1) / kGradientChunk;

            const auto where = [&] {
                return "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                       ", seed " + std::to_string(cfg.seed);
            };
            try {
                parallel_for(chunks, cfg.workers, [&](std::size_t c) {
                    Gradients& g = chunk_grads[c];
                    g.set_zero();
                    double loss = 0.0;
                    const std::size_t end = std::min(count, (c + 1) * kGradientChunk);
                    for (std::size_t t = c * kGradientChunk; t < end; ++t) {
                        const auto& pair = order[start + t];
                        loss += accumulate_gradients(params, data[pair.input], data[pair.target], g);
                    }
                    chunk_loss[c] = loss;
                });
            } catch (const Error& e) {
                // Overflowing activations mean the run has diverged.
                if (e.code() != ErrorCode::NonFiniteActivation)
                    throw;
                fail(ErrorCode::NonFiniteLoss, where() + ": " + e.what());
            }

            batch_grad.set_zero();
            double batch_loss = 0.0;
            for (std::size_t c = 0; c < chunks; ++c) {
                batch_grad += chunk_grads[c];
                batch_loss += chunk_loss[c];
            }
            if (!std::isfinite(batch_loss))
                fail(ErrorCode::NonFiniteLoss, where());
            batch_grad *= 1.0 / static_cast<double>(count);
            apply_sgd(params, batch_grad, lr);
            epoch_loss += batch_loss;
        }
        epoch_loss /= static_cast<double>(order.size());

        report.loss_per_epoch.push_back(epoch_loss);
        report.lr_per_epoch.push_back(lr);
        report.final_lr = lr;
        ++report.epochs_run;
        if (cfg.on_epoch)
            cfg.on_epoch(epoch, epoch_loss, lr);
        if (cfg.on_checkpoint && cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0)
            cfg.on_checkpoint(epoch + 1, params);

        if (epoch_loss < best - cfg.min_improvement) {
            best = epoch_loss;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            report.stopped_early = epoch + 1 < cfg.epochs;
            break;
        }
    }
    return {std::move(params), std::move(report)};
}

// Conventional autoencoder: every vector reconstructs itself.
inline TrainResult train_baseline(const Dataset& data, std::span<const std::size_t> arch,
                                  TrainConfig cfg)
{
    cfg.mode = TrainMode::SelfReconstruction;
    const auto pairs = self_pairs(data.size());
    return train_nsae(data, pairs, arch, cfg);
}

} // namespace nsae
