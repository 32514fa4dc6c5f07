#include "oracles.hpp"

#include <nsae/synthdata.hpp>

#include <catch_amalgamated.hpp>

#include <set>

using Catch::Matchers::WithinAbs;
using nsae::ErrorCode;

namespace {

std::pair<double, double> within_and_cross(const nsae::LabeledDataset& ds)
{
    double within = 0, cross = 0;
    std::size_t nw = 0, nc = 0;
    for (std::size_t i = 0; i < ds.vectors.size(); ++i)
        for (std::size_t j = i + 1; j < ds.vectors.size(); ++j) {
            const double c = oracle::cosine(ds.vectors[i], ds.vectors[j]);
            if (ds.labels[i] == ds.labels[j]) {
                within += c;
                ++nw;
            } else {
                cross += c;
                ++nc;
            }
        }
    return {within / static_cast<double>(nw), cross / static_cast<double>(nc)};
}

} // namespace

TEST_CASE("generate", "[synthdata]")
{
    const nsae::SynthConfig cfg{.n_identities = 10, .samples_per_identity = 20, .dim = 64,
                                .session_noise = 0.3, .seed = 42};
    const auto ds = nsae::generate(cfg);
    REQUIRE(ds.vectors.size() == 200);
    REQUIRE(ds.labels.size() == 200);
    for (std::size_t i = 0; i < 200; ++i) {
        CHECK(ds.labels[i] == static_cast<int>(i / 20));
        CHECK(ds.vectors[i].size() == 64);
        CHECK_THAT(nsae::norm(ds.vectors[i]), WithinAbs(1.0, 1e-12));
    }

    const auto again = nsae::generate(cfg);
    CHECK(again.vectors == ds.vectors);
    CHECK(again.labels == ds.labels);
    auto other = cfg;
    other.seed = 43;
    CHECK_FALSE(nsae::generate(other).vectors == ds.vectors);

    const auto [within, cross] = within_and_cross(ds);
    UNSCOPED_INFO("within " << within << ", cross " << cross);
    CHECK(within > cross);

    SECTION("no noise collapses each identity to its centroid")
    {
        auto clean = cfg;
        clean.session_noise = 0.0;
        const auto c = nsae::generate(clean);
        for (std::size_t i = 0; i < c.vectors.size(); ++i)
            for (std::size_t j = i + 1; j < c.vectors.size(); ++j)
                if (c.labels[i] == c.labels[j])
                    CHECK(nsae::cosine_score(c.vectors[i], c.vectors[j]) == 1.0);
    }
    SECTION("invalid configurations")
    {
        for (auto bad : {nsae::SynthConfig{.n_identities = 1}, nsae::SynthConfig{.samples_per_identity = 1},
                         nsae::SynthConfig{.dim = 1}, nsae::SynthConfig{.session_noise = -0.1}})
            CHECK_THROWS_AS(nsae::generate(bad), nsae::Error);
    }
}

TEST_CASE("more session noise lowers within-identity similarity", "[synthdata][property]")
{
    const double noises[] = {0.05, 0.1, 0.2, 0.4, 0.8};
    double previous = 2.0;
    for (double noise : noises) {
        double mean = 0;
        for (std::uint64_t seed = 0; seed < 5; ++seed)
            mean += within_and_cross(nsae::generate({.n_identities = 5, .samples_per_identity = 8,
                                                     .dim = 32, .session_noise = noise, .seed = seed}))
                        .first;
        mean /= 5;
        CHECK(mean < previous);
        previous = mean;
    }
}

TEST_CASE("make_trials", "[synthdata]")
{
    const std::vector<int> tiny{0, 0, 1, 1};
    const auto t = nsae::make_trials(tiny, 1, 1, 5);
    REQUIRE(t.size() == 2);
    CHECK(t[0].label == nsae::TrialLabel::Matched);
    CHECK(tiny[t[0].a] == tiny[t[0].b]);
    CHECK(t[1].label == nsae::TrialLabel::Mismatched);
    CHECK(tiny[t[1].a] != tiny[t[1].b]);

    const auto ds = nsae::generate({});
    for (std::uint64_t seed : {1, 42}) {
        const auto trials = nsae::make_trials(ds, 300, 300, seed);
        REQUIRE(trials.size() == 600);
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (std::size_t i = 0; i < trials.size(); ++i) {
            const auto& tr = trials[i];
            CHECK(tr.a < tr.b);
            CHECK(tr.b < ds.labels.size());
            CHECK((tr.label == nsae::TrialLabel::Matched) == (i < 300));
            CHECK((ds.labels[tr.a] == ds.labels[tr.b]) == (tr.label == nsae::TrialLabel::Matched));
            seen.insert({tr.a, tr.b});
        }
        CHECK(seen.size() == 600);
        CHECK(nsae::make_trials(ds, 300, 300, seed) == trials);
    }

    // Exhausting a pool returns every pair exactly once.
    const auto all = nsae::make_trials(tiny, 2, 4, 1);
    CHECK(all.size() == 6);

    try {
        nsae::make_trials(tiny, 3, 0, 1);
        FAIL("expected InsufficientPairs");
    } catch (const nsae::Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientPairs);
    }
    CHECK_THROWS_AS(nsae::make_trials(tiny, 0, 5, 1), nsae::Error);
}
