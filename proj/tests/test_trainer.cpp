#include "oracles.hpp"

#include <nsae/neighbors.hpp>
#include <nsae/embed.hpp>
#include <nsae/synthdata.hpp>
#include <nsae/trainer.hpp>
#include <nsae/vecmath.hpp>

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <vector>

using Catch::Matchers::WithinAbs;
using nsae::ErrorCode;

namespace {

const std::vector<std::size_t> kArch{16, 8, 4, 8, 16};

nsae::LabeledDataset clustered(std::uint64_t seed, double noise = 0.2)
{
    return nsae::generate({.n_identities = 8,
                           .samples_per_identity = 10,
                           .dim = 16,
                           .session_noise = noise,
                           .seed = seed});
}

std::vector<nsae::TrainingPair> knn_pairs(const nsae::Dataset& data, std::size_t k)
{
    return nsae::build_training_pairs(nsae::select_topk(nsae::pairwise_cosine(data), k),
                                      nsae::Fallback::Top1);
}

nsae::TrainConfig quick_config(std::uint64_t seed, std::size_t epochs = 50)
{
    nsae::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = 10;
    cfg.schedule = nsae::ConstantWithDecay{2.0, 0.0002};
    cfg.seed = seed;
    cfg.patience = epochs;
    return cfg;
}

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const nsae::Error& e) {
        return e.code();
    }
    FAIL("expected nsae::Error");
    return ErrorCode::IoFailure;
}

double within_identity_cosine(const nsae::Dataset& v, const std::vector<int>& labels)
{
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            if (labels[i] == labels[j] && nsae::norm(v[i]) > 0 && nsae::norm(v[j]) > 0) {
                sum += nsae::cosine_score(v[i], v[j]);
                ++count;
            }
    return sum / static_cast<double>(count);
}

} // namespace

TEST_CASE("training is deterministic for a fixed seed", "[trainer]")
{
    const auto ds = clustered(3);
    const auto pairs = knn_pairs(ds.vectors, 3);
    const auto a = nsae::train_nsae(ds.vectors, pairs, kArch, quick_config(11, 10));
    const auto b = nsae::train_nsae(ds.vectors, pairs, kArch, quick_config(11, 10));
    CHECK(a.params == b.params);
    CHECK(a.report == b.report);
    const auto c = nsae::train_nsae(ds.vectors, pairs, kArch, quick_config(12, 10));
    CHECK_FALSE(a.params == c.params);
}

TEST_CASE("worker count does not change the result", "[trainer]")
{
    const auto ds = clustered(4);
    const auto pairs = knn_pairs(ds.vectors, 5);
    auto cfg = quick_config(2, 5);
    cfg.batch_size = 37;
    const auto one = nsae::train_nsae(ds.vectors, pairs, kArch, cfg);
    for (unsigned w : {2u, 3u, 8u}) {
        cfg.workers = w;
        const auto many = nsae::train_nsae(ds.vectors, pairs, kArch, cfg);
        CHECK(many.params == one.params);
        CHECK(many.report == one.report);
    }
}

TEST_CASE("self-reconstruction mode is the conventional autoencoder", "[trainer]")
{
    const auto ds = clustered(5);
    const auto self = nsae::self_pairs(ds.vectors.size());
    const auto explicit_pairs = nsae::train_nsae(ds.vectors, self, kArch, quick_config(1, 8));
    const auto baseline = nsae::train_baseline(ds.vectors, kArch, quick_config(1, 8));
    CHECK(explicit_pairs.params == baseline.params);
    CHECK(explicit_pairs.report == baseline.report);

    auto cfg = quick_config(1, 8);
    cfg.mode = nsae::TrainMode::SelfReconstruction;
    const auto mode = nsae::train_nsae(ds.vectors, knn_pairs(ds.vectors, 3), kArch, cfg);
    CHECK(mode.params == baseline.params);
}

TEST_CASE("epoch 0 loss of a single full batch is the untrained reconstruction error", "[trainer]")
{
    const auto ds = clustered(6);
    auto cfg = quick_config(9, 1);
    cfg.batch_size = ds.vectors.size();
    const auto untrained = nsae::init_autoencoder(kArch, cfg.seed);
    double expected = 0;
    for (const auto& x : ds.vectors)
        expected += oracle::loss(untrained, x, x);
    expected /= static_cast<double>(ds.vectors.size());
    const auto r = nsae::train_baseline(ds.vectors, kArch, cfg);
    CHECK_THAT(r.report.loss_per_epoch.at(0), WithinAbs(expected, 1e-12));
}

TEST_CASE("loss falls on clustered data", "[trainer]")
{
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto ds = clustered(seed);
        const auto r = nsae::train_nsae(ds.vectors, knn_pairs(ds.vectors, 3), kArch, quick_config(seed));
        const auto& loss = r.report.loss_per_epoch;
        REQUIRE(loss.size() == 50);
        REQUIRE(r.report.epochs_run == 50);
        CHECK_FALSE(r.report.stopped_early);
        for (std::size_t e = 6; e < loss.size(); ++e) {
            CHECK(std::isfinite(loss[e]));
            CHECK(loss[e] <= loss[e - 1] + 1e-3);
        }
        CHECK(loss.back() <= 0.5 * loss.front());
    }
}

TEST_CASE("report bookkeeping", "[trainer]")
{
    const auto ds = clustered(7);
    std::vector<std::size_t> seen_epochs;
    std::vector<std::size_t> checkpoints;
    auto cfg = quick_config(3, 12);
    cfg.checkpoint_every = 5;
    cfg.on_epoch = [&](std::size_t e, double loss, double lr) {
        seen_epochs.push_back(e);
        CHECK(loss >= 0.0);
        CHECK(lr > 0.0);
    };
    cfg.on_checkpoint = [&](std::size_t e, const nsae::AutoencoderParams&) { checkpoints.push_back(e); };
    const auto r = nsae::train_baseline(ds.vectors, kArch, cfg);
    CHECK(r.report.epochs_run == 12);
    CHECK(r.report.loss_per_epoch.size() == 12);
    CHECK(r.report.lr_per_epoch.size() == 12);
    CHECK(r.report.final_lr == r.report.lr_per_epoch.back());
    CHECK(seen_epochs.size() == 12);
    CHECK(checkpoints == std::vector<std::size_t>{5, 10});
    for (double l : r.report.loss_per_epoch)
        CHECK(l >= 0.0);
}

TEST_CASE("early stopping", "[trainer]")
{
    const auto ds = clustered(8);
    SECTION("a frozen learning rate stops after patience epochs")
    {
        auto cfg = quick_config(1, 100);
        cfg.schedule = nsae::LogDecay{1e-300, 1e-301};
        cfg.patience = 4;
        const auto r = nsae::train_baseline(ds.vectors, kArch, cfg);
        CHECK(r.report.stopped_early);
        CHECK(r.report.epochs_run == 5);
    }
    SECTION("patience equal to epochs runs every epoch")
    {
        auto cfg = quick_config(1, 15);
        cfg.schedule = nsae::LogDecay{1e-300, 1e-301};
        const auto r = nsae::train_baseline(ds.vectors, kArch, cfg);
        CHECK_FALSE(r.report.stopped_early);
        CHECK(r.report.epochs_run == 15);
    }
}

TEST_CASE("resuming from a checkpoint replays the same run", "[trainer]")
{
    const auto ds = clustered(9);
    const auto pairs = knn_pairs(ds.vectors, 2);
    auto cfg = quick_config(21, 20);
    std::optional<nsae::AutoencoderParams> at10;
    cfg.checkpoint_every = 10;
    cfg.on_checkpoint = [&](std::size_t e, const nsae::AutoencoderParams& p) {
        if (e == 10)
            at10 = p;
    };
    const auto full = nsae::train_nsae(ds.vectors, pairs, kArch, cfg);
    REQUIRE(at10);

    auto resume = quick_config(21, 20);
    resume.initial = at10;
    resume.start_epoch = 10;
    const auto tail = nsae::train_nsae(ds.vectors, pairs, kArch, resume);
    CHECK(tail.params == full.params);
    CHECK(tail.report.loss_per_epoch ==
          std::vector<double>(full.report.loss_per_epoch.begin() + 10, full.report.loss_per_epoch.end()));
}

TEST_CASE("each epoch visits the pair multiset exactly once", "[trainer][property]")
{
    // With a vanishing learning rate the parameters barely move, so every
    // epoch loss is the mean per-pair loss. A dropped or repeated pair would
    // shift it.
    const auto ds = clustered(10);
    const auto pairs = knn_pairs(ds.vectors, 2);
    const auto p = nsae::init_autoencoder(kArch, 5);
    double sum = 0;
    for (const auto& pr : pairs)
        sum += oracle::loss(p, ds.vectors[pr.input], ds.vectors[pr.target]);

    auto cfg = quick_config(5, 3);
    cfg.batch_size = 1;
    cfg.schedule = nsae::LogDecay{1e-300, 1e-301};
    cfg.initial = p;
    const auto r = nsae::train_nsae(ds.vectors, pairs, kArch, cfg);
    for (double l : r.report.loss_per_epoch)
        CHECK_THAT(l, WithinAbs(sum / static_cast<double>(pairs.size()), 1e-12));
}

TEST_CASE("duplicated vectors make neighbor and self targets coincide", "[trainer]")
{
    nsae::Dataset dup(12, oracle::random_vectors(1, 16, 3)[0]);
    const auto pairs = knn_pairs(dup, 1);
    const auto nsae_run = nsae::train_nsae(dup, pairs, kArch, quick_config(4, 30));
    const auto base_run = nsae::train_baseline(dup, kArch, quick_config(4, 30));
    CHECK_THAT(nsae_run.report.loss_per_epoch.back(),
               WithinAbs(base_run.report.loss_per_epoch.back(), 1e-6));
}

TEST_CASE("training input errors", "[trainer]")
{
    const auto ds = clustered(11);
    const std::vector<nsae::TrainingPair> none;
    CHECK(code_of([&] { nsae::train_nsae(ds.vectors, none, kArch, quick_config(1)); }) ==
          ErrorCode::EmptyPairs);
    const std::vector<nsae::TrainingPair> bad{{0, 999, false}};
    CHECK(code_of([&] { nsae::train_nsae(ds.vectors, bad, kArch, quick_config(1)); }) ==
          ErrorCode::IndexOutOfRange);
    const std::vector<std::size_t> wide{32, 8, 32};
    CHECK(code_of([&] { nsae::train_baseline(ds.vectors, wide, quick_config(1)); }) ==
          ErrorCode::DimensionMismatch);
    auto zero_epochs = quick_config(1);
    zero_epochs.epochs = 0;
    CHECK(code_of([&] { nsae::train_baseline(ds.vectors, kArch, zero_epochs); }) ==
          ErrorCode::InvalidConfig);
    auto huge = quick_config(1, 5);
    huge.schedule = nsae::ConstantWithDecay{1e200, 0.0};
    CHECK(code_of([&] { nsae::train_baseline(ds.vectors, kArch, huge); }) == ErrorCode::NonFiniteLoss);
}

TEST_CASE("neighbor training tightens identities", "[trainer][statistical]")
{
    int held = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto ds = clustered(seed, 0.3);
        const auto r = nsae::train_nsae(ds.vectors, knn_pairs(ds.vectors, 5), kArch, quick_config(seed, 100));
        const auto emb = nsae::extract_all(r.params, ds.vectors);
        const double raw = within_identity_cosine(ds.vectors, ds.labels);
        const double learned = within_identity_cosine(emb, ds.labels);
        UNSCOPED_INFO("seed " << seed << ": raw " << raw << ", embedded " << learned);
        held += learned > raw;
    }
    CHECK(held >= 3);
}
