// nsae: command-line front end. Every subcommand that writes files also
// writes <output>.manifest.json with the fully resolved options and output
// checksums; `nsae rerun --manifest FILE` replays it and compares.

#include <nsae/nsae.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

// Stage and seed reported alongside any failure.
struct Stage {
    std::string name = "startup";
    std::optional<std::uint64_t> seed;
};
Stage g_stage;

void enter(std::string name, std::optional<std::uint64_t> seed = {})
{
    g_stage = {std::move(name), seed};
}

[[noreturn]] void usage(const std::string& msg)
{
    nsae::fail(nsae::ErrorCode::InvalidConfig, msg);
}

std::string env_name(std::string_view flag)
{
    std::string out = "NSAE_";
    for (char c : flag)
        out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

template <class T>
json value_json(const T& v)
{
    if constexpr (std::is_same_v<T, std::string>)
        return v.empty() ? json() : json(v);
    else if constexpr (std::is_same_v<T, std::vector<std::string>>)
        return v.empty() ? json() : json(v);
    else
        return json(v);
}

// Registers options and reads back their resolved values for the manifest.
class OptionSet {
public:
    explicit OptionSet(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* add(const std::string& name, T& var, const std::string& help)
    {
        auto* opt = app_->add_option("--" + name, var, help)->envname(env_name(name));
        entries_.push_back({name, [&var] { return value_json(var); }});
        return opt;
    }

    // Value is recorded only when supplied (flag, environment or config file).
    template <class T>
    CLI::Option* add_optional(const std::string& name, T& var, const std::string& help)
    {
        auto* opt = app_->add_option("--" + name, var, help)->envname(env_name(name));
        entries_.push_back({name, [&var, opt] { return opt->count() ? value_json(var) : json(); }});
        return opt;
    }

    CLI::Option* flag(const std::string& name, bool& var, const std::string& help)
    {
        auto* opt = app_->add_flag("--" + name, var, help)->envname(env_name(name));
        entries_.push_back({name, [&var] { return json(var); }});
        return opt;
    }

    json resolved() const
    {
        json j = json::object();
        for (const auto& [name, get] : entries_)
            j[name] = get();
        return j;
    }

    CLI::App* app() const { return app_; }

private:
    CLI::App* app_;
    std::vector<std::pair<std::string, std::function<json()>>> entries_;
};

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& flag)
{
    std::vector<T> out;
    for (auto field : nsae::io::split(text, ',')) {
        field = nsae::io::trim(field);
        T v{};
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
            usage("--" + flag + ": cannot parse '" + std::string(field) + "'");
        out.push_back(v);
    }
    return out;
}

bool desk_requested(const std::vector<std::string>& args)
{
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--preset=desk" || (args[i] == "--preset" && i + 1 < args.size() &&
                                           args[i + 1] == "desk"))
            return true;
    }
    const char* env = std::getenv("NSAE_PRESET");
    return env && std::string_view(env) == "desk";
}

// What a command touched, for the manifest.
struct RunRecord {
    fs::path primary;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
    std::optional<std::uint64_t> seed;
};

json checksums(const std::vector<fs::path>& paths)
{
    json arr = json::array();
    for (const auto& p : paths)
        arr.push_back({{"path", p.string()}, {"fnv1a", nsae::io::file_checksum(p)}});
    return arr;
}

fs::path manifest_path(const fs::path& primary)
{
    return fs::path(primary.string() + ".manifest.json");
}

// ---------------------------------------------------------------------------
// Shared option groups

struct Common {
    std::uint64_t seed = 42;
    unsigned threads = 1;
    std::string preset;
    bool quiet = false;
};

void add_preset(OptionSet& o, Common& c)
{
    o.add_optional("preset", c.preset, "Benchmark preset")->check(CLI::IsMember({"desk"}));
}

struct SynthOpts {
    std::size_t identities = 20;
    std::size_t samples = 20;
    std::size_t dim = 64;
    double noise = 0.2;

    explicit SynthOpts(bool desk)
    {
        if (desk) {
            const auto p = nsae::desk_preset().synth;
            identities = p.n_identities;
            samples = p.samples_per_identity;
            dim = p.dim;
            noise = p.session_noise;
        }
    }
    void add(OptionSet& o)
    {
        o.add("identities", identities, "Number of identities");
        o.add("samples", samples, "Samples per identity");
        o.add("dim", dim, "Vector dimension");
        o.add("noise", noise, "Session noise standard deviation");
    }
    nsae::SynthConfig config(std::uint64_t seed) const
    {
        return {identities, samples, dim, noise, seed};
    }
};

struct TrainOpts {
    std::string arch;
    std::size_t epochs = 400;
    std::size_t batch_size = 100;
    std::string schedule = "log";
    double lr_start = 1e-2;
    double lr_end = 1e-8;
    double lr = 0.03;
    double decay = 0.0002;
    std::size_t patience = 20;
    double min_improvement = 1e-7;
    std::string fallback = "top1";

    explicit TrainOpts(bool desk)
    {
        if (desk) {
            const auto p = nsae::desk_preset().pipeline;
            arch = "64,32,16,32,64";
            epochs = p.train.epochs;
            batch_size = p.train.batch_size;
            schedule = "constant";
            const auto s = std::get<nsae::ConstantWithDecay>(p.train.schedule);
            lr = s.lr0;
            decay = s.decay;
            patience = p.train.patience;
        }
    }
    void add(OptionSet& o)
    {
        o.add("arch", arch, "Layer sizes, e.g. 64,32,16,32,64 (default derived from the input dim)");
        o.add("epochs", epochs, "Maximum epochs");
        o.add("batch-size", batch_size, "Pairs per SGD batch");
        o.add("schedule", schedule, "Learning-rate schedule")->check(CLI::IsMember({"log", "constant"}));
        o.add("lr-start", lr_start, "log schedule: first-epoch rate");
        o.add("lr-end", lr_end, "log schedule: last-epoch rate");
        o.add("lr", lr, "constant schedule: base rate");
        o.add("decay", decay, "constant schedule: lr / (1 + decay * epoch)");
        o.add("patience", patience, "Early-stop window in epochs");
        o.add("min-improvement", min_improvement, "Loss improvement that resets patience");
        o.add("fallback", fallback, "Target for rows without neighbors")
            ->check(CLI::IsMember({"self", "top1"}));
    }
    std::vector<std::size_t> layer_sizes(std::size_t input_dim) const
    {
        if (arch.empty()) {
            const std::size_t h = std::max<std::size_t>(1, input_dim / 2);
            const std::size_t b = std::max<std::size_t>(1, input_dim / 4);
            return {input_dim, h, b, h, input_dim};
        }
        auto sizes = parse_list<std::size_t>(arch, "arch");
        nsae::validate_architecture(sizes);
        return sizes;
    }
    nsae::Fallback fallback_mode() const
    {
        return fallback == "self" ? nsae::Fallback::SelfReconstruction : nsae::Fallback::Top1;
    }
    nsae::TrainConfig config(const Common& c) const
    {
        nsae::TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        if (schedule == "log")
            cfg.schedule = nsae::LogDecay{lr_start, lr_end};
        else
            cfg.schedule = nsae::ConstantWithDecay{lr, decay};
        nsae::validate(cfg.schedule);
        cfg.seed = c.seed;
        cfg.patience = patience;
        cfg.min_improvement = min_improvement;
        cfg.workers = c.threads;
        if (epochs < 1 || batch_size < 1 || patience < 1)
            usage("--epochs, --batch-size and --patience must be >= 1");
        return cfg;
    }
};

struct EmbedOpts {
    std::string tap = "bottleneck";
    bool no_normalize = false;

    void add(OptionSet& o)
    {
        o.add("tap", tap, "Embedding layer")->check(CLI::IsMember({"bottleneck", "output"}));
        o.flag("no-normalize", no_normalize, "Keep embeddings unnormalized");
    }
    nsae::EmbedOptions options(unsigned threads) const
    {
        return {tap == "bottleneck" ? nsae::EmbeddingTap::Bottleneck : nsae::EmbeddingTap::DecoderOutput,
                !no_normalize, threads};
    }
};

nsae::ZeroVectorPolicy zero_policy(const std::string& s)
{
    return s == "error" ? nsae::ZeroVectorPolicy::Error : nsae::ZeroVectorPolicy::ScoreZero;
}

void warn_zero(const nsae::ScoreSet& s)
{
    if (s.zero_vector_trials > 0)
        std::cerr << "nsae: warning: " << s.zero_vector_trials
                  << " trial(s) involve an all-zero embedding and were scored 0 (" << s.source
                  << ")\n";
}

nsae::CountConvention convention(const std::string& s)
{
    return s == "nk-1" ? nsae::CountConvention::NTimesKMinus1 : nsae::CountConvention::NTimesK;
}

// Neighbor map -> training pairs; Top1 fallback needs the similarity matrix
// because map files do not store it.
std::vector<nsae::TrainingPair> pairs_from_map(nsae::NeighborMap map, const nsae::Dataset& data,
                                               nsae::Fallback fallback, unsigned threads)
{
    if (map.size() != data.size())
        nsae::fail(nsae::ErrorCode::InvalidNeighborMap,
                   "neighbor map has " + std::to_string(map.size()) + " rows for " +
                       std::to_string(data.size()) + " vectors");
    const bool any_empty = std::any_of(map.neighbors.begin(), map.neighbors.end(),
                                       [](const auto& row) { return row.empty(); });
    if (fallback == nsae::Fallback::Top1 && any_empty)
        nsae::attach_top1(map, nsae::pairwise_cosine(data, threads));
    return nsae::build_training_pairs(map, fallback);
}

// ---------------------------------------------------------------------------
// Subcommands. Each registers its options and returns the action to run.

using Action = std::function<RunRecord()>;

struct Command {
    CLI::App* app;
    std::shared_ptr<OptionSet> opts;
    Action action;
};

Command synth_command(CLI::App& root, bool desk)
{
    auto* sub = root.add_subcommand("synth", "Generate a labelled synthetic identity dataset");
    auto o = std::make_shared<OptionSet>(sub);
    auto c = std::make_shared<Common>();
    auto s = std::make_shared<SynthOpts>(desk);
    auto out = std::make_shared<std::string>();
    auto labels = std::make_shared<std::string>();
    o->add("output", *out, "Vector file (.csv for text)")->required();
    o->add("labels", *labels, "Label file (default <output>.labels)");
    s->add(*o);
    o->add("seed", c->seed, "Random seed");
    add_preset(*o, *c);
    return {sub, o, [=] {
                enter("synth", c->seed);
                const auto ds = nsae::generate(s->config(c->seed));
                const fs::path vec = *out;
                const fs::path lab = labels->empty() ? fs::path(*out + ".labels") : fs::path(*labels);
                nsae::io::save_vectors(vec, ds.vectors);
                nsae::io::save_labels(lab, ds.labels);
                return RunRecord{vec, {}, {vec, lab}, c->seed};
            }};
}

Command trials_command(CLI::App& root, bool)
{
    auto* sub = root.add_subcommand("trials", "Sample matched and mismatched verification trials");
    auto o = std::make_shared<OptionSet>(sub);
    auto c = std::make_shared<Common>();
    auto labels = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto matched = std::make_shared<std::size_t>(300);
    auto mismatched = std::make_shared<std::size_t>(300);
    o->add("labels", *labels, "Label file")->required();
    o->add("output", *out, "Trial file")->required();
    o->add("matched", *matched, "Matched trials");
    o->add("mismatched", *mismatched, "Mismatched trials");
    o->add("seed", c->seed, "Random seed");
    add_preset(*o, *c);
    return {sub, o, [=] {
                enter("trials", c->seed);
                const auto l = nsae::io::load_labels(*labels);
                const auto trials = nsae::make_trials(l, *matched, *mismatched, c->seed);
                nsae::io::save_trials(*out, trials);
                return RunRecord{*out, {*labels}, {*out}, c->seed};
            }};
}

Command neighbors_command(CLI::App& root, bool desk)
{
    auto* sub = root.add_subcommand("neighbors", "Select cosine nearest neighbors without labels");
    auto o = std::make_shared<OptionSet>(sub);
    auto c = std::make_shared<Common>();
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto k = std::make_shared<std::size_t>(0);
    auto threshold = std::make_shared<double>(0.0);
    auto conv = std::make_shared<std::string>("nk");
    o->add("input", *in, "Vector file")->required();
    o->add("output", *out, "Neighbor map file")->required();
    auto* k_opt = o->add_optional("k", *k, "Top-k neighbors per vector");
    auto* t_opt = o->add_optional("threshold", *threshold, "Cosine threshold");
    k_opt->excludes(t_opt);
    o->add("convention", *conv, "Pair count convention: nk or nk-1")
        ->check(CLI::IsMember({"nk", "nk-1"}));
    o->add("threads", c->threads, "Worker threads");
    add_preset(*o, *c);
    return {sub, o, [=] {
                const bool use_k = k_opt->count() > 0 || (desk && t_opt->count() == 0);
                if (desk && k_opt->count() == 0 && use_k)
                    *k = *nsae::desk_preset().pipeline.k;
                if (!use_k && t_opt->count() == 0)
                    usage("neighbors: one of --k or --threshold is required");
                enter("neighbors");
                const auto data = nsae::io::load_vectors(*in);
                const auto sim = nsae::pairwise_cosine(data, c->threads);
                auto map = use_k ? nsae::apply_count_convention(nsae::select_topk(sim, *k), convention(*conv))
                                 : nsae::select_threshold(sim, *threshold);
                nsae::io::save_neighbor_map(*out, map);
                return RunRecord{*out, {*in}, {*out}, {}};
            }};
}

Command train_command(CLI::App& root, bool desk)
{
    auto* sub = root.add_subcommand("train", "Train the autoencoder on neighbor (or self) targets");
    auto o = std::make_shared<OptionSet>(sub);
    auto c = std::make_shared<Common>();
    auto t = std::make_shared<TrainOpts>(desk);
    auto in = std::make_shared<std::string>();
    auto neighbors = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto log = std::make_shared<std::string>();
    auto resume = std::make_shared<std::string>();
    auto every = std::make_shared<std::size_t>(50);
    o->add("input", *in, "Vector file")->required();
    o->add("neighbors", *neighbors, "Neighbor map (omit for self-reconstruction)");
    o->add("output", *out, "Checkpoint file")->required();
    o->add("log", *log, "Epoch log (default <output>.log)");
    t->add(*o);
    o->add("checkpoint-every", *every, "Write <output>.epochN every N epochs (0 disables)");
    o->add("resume", *resume, "Continue from this checkpoint");
    o->add("seed", c->seed, "Random seed");
    o->add("threads", c->threads, "Worker threads");
    o->flag("quiet", c->quiet, "No per-epoch log on stderr");
    add_preset(*o, *c);
    return {sub, o, [=] {
                auto cfg = t->config(*c);
                enter("train", c->seed);
                const auto data = nsae::io::load_vectors(*in);
                if (data.empty())
                    nsae::fail(nsae::ErrorCode::TooFewVectors, *in + ": no vectors");
                const auto arch = t->layer_sizes(data.front().size());

                RunRecord rec{*out, {*in}, {}, c->seed};
                std::vector<nsae::TrainingPair> pairs;
                if (neighbors->empty()) {
                    cfg.mode = nsae::TrainMode::SelfReconstruction;
                    pairs = nsae::self_pairs(data.size());
                } else {
                    rec.inputs.push_back(*neighbors);
                    pairs = pairs_from_map(nsae::io::load_neighbor_map(*neighbors), data,
                                           t->fallback_mode(), c->threads);
                }

                // Identifies the run so a checkpoint cannot resume a different one.
                json identity = o->resolved();
                for (const char* volatile_key : {"output", "log", "resume", "threads", "quiet",
                                                 "checkpoint-every", "input", "neighbors"})
                    identity.erase(volatile_key);
                identity["input_fnv1a"] = nsae::io::file_checksum(*in);
                if (!neighbors->empty())
                    identity["neighbors_fnv1a"] = nsae::io::file_checksum(*neighbors);
                const std::uint64_t hash = nsae::io::fnv1a(identity.dump());

                if (!resume->empty()) {
                    auto ckpt = nsae::io::load_checkpoint(*resume);
                    if (ckpt.meta.config_hash != hash)
                        usage("--resume: checkpoint was written by a run with a different configuration");
                    if (ckpt.meta.epoch >= cfg.epochs)
                        usage("--resume: checkpoint is already at epoch " + std::to_string(ckpt.meta.epoch));
                    cfg.initial = std::move(ckpt.params);
                    cfg.start_epoch = ckpt.meta.epoch;
                    rec.inputs.push_back(*resume);
                }

                cfg.checkpoint_every = *every;
                cfg.on_checkpoint = [&](std::size_t epoch, const nsae::AutoencoderParams& p) {
                    const fs::path path = *out + ".epoch" + std::to_string(epoch);
                    nsae::io::save_checkpoint(path, p, {epoch, c->seed, hash});
                    rec.outputs.push_back(path);
                };
                if (!c->quiet)
                    cfg.on_epoch = [](std::size_t epoch, double loss, double lr) {
                        std::fprintf(stderr, "epoch %zu loss %.6g lr %.6g\n", epoch, loss, lr);
                    };

                const auto result = nsae::train_nsae(data, pairs, arch, cfg);
                const std::size_t last = cfg.start_epoch + result.report.epochs_run;
                nsae::io::save_checkpoint(*out, result.params, {last, c->seed, hash});
                const fs::path log_path = log->empty() ? fs::path(*out + ".log") : fs::path(*log);
                nsae::io::write_file_atomic(log_path,
                                            nsae::io::encode_train_log(result.report, cfg.start_epoch));
                rec.outputs.insert(rec.outputs.begin(), {fs::path(*out), log_path});
                if (!c->quiet && result.report.stopped_early)
                    std::fprintf(stderr, "stopped early after epoch %zu\n", last - 1);
                return rec;
            }};
}

Command embed_command(CLI::App& root, bool)
{
    auto* sub = root.add_subcommand("embed", "Map vectors through a trained model");
    auto o = std::make_shared<OptionSet>(sub);
    auto c = std::make_shared<Common>();
    auto e = std::make_shared<EmbedOpts>();
    auto model = std::make_shared<std::string>();
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    o->add("model", *model, "Checkpoint file")->required();
    o->add("input", *in, "Vector file")->required();
    o->add("output", *out, "Embedding file")->required();
    e->add(*o);
    o->add("threads", c->threads, "Worker threads");
    add_preset(*o, *c);
    return {sub, o, [=] {
                enter("embed");
                const auto ckpt = nsae::io::load_checkpoint(*model);
                const auto data = nsae::io::load_vectors(*in);
                nsae::io::save_vectors(*out, nsae::extract_all(ckpt.params, data, e->options(c->threads)));
                return RunRecord{*out, {*model, *in}, {*out}, {}};
            }};
}

Command score_command(CLI::App& root, bool)
{
    auto* sub = root.add_subcommand("score", "Cosine-score verification trials");
    auto o = std::make_shared<OptionSet>(sub);
    auto c = std::make_shared<Common>();
    auto in = std::make_shared<std::string>();
    auto trials = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto policy = std::make_shared<std::string>("zero");
    auto source = std::make_shared<std::string>("cosine");
    o->add("input", *in, "Embedding file")->required();
    o->add("trials", *trials, "Trial file")->required();
    o->add("output", *out, "Score file")->required();
    o->add("source", *source, "Source tag written to the score file");
    o->add("zero-policy", *policy, "All-zero embeddings: score 0 (with a warning) or fail")
        ->check(CLI::IsMember({"zero", "error"}));
    o->add("threads", c->threads, "Worker threads");
    add_preset(*o, *c);
    return {sub, o, [=] {
                enter("score");
                const auto emb = nsae::io::load_vectors(*in);
                const auto t = nsae::io::load_trials(*trials, emb.size());
                auto s = nsae::score_trials(emb, t, {c->threads, zero_policy(*policy)});
                s.source = *source;
                warn_zero(s);
                nsae::io::save_scores(*out, t, s);
                return RunRecord{*out, {*in, *trials}, {*out}, {}};
            }};
}

Command eval_command(CLI::App& root, bool)
{
    auto* sub = root.add_subcommand("eval", "Compute EER and accuracy from a score file");
    auto o = std::make_shared<OptionSet>(sub);
    auto c = std::make_shared<Common>();
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto no_roc = std::make_shared<bool>(false);
    o->add("input", *in, "Score file")->required();
    o->add("output", *out, "JSON report (optional)");
    o->flag("no-roc", *no_roc, "Omit ROC points from the JSON report");
    add_preset(*o, *c);
    return {sub, o, [=] {
                enter("eval");
                const auto sf = nsae::io::load_scores(*in);
                const auto report = nsae::compute_eer(sf.scores, sf.trials);
                std::cout << nsae::io::render_report(report);
                if (out->empty())
                    return RunRecord{};
                json j;
                j["source"] = sf.scores.source;
                j.update(nsae::io::to_json(report, !*no_roc));
                nsae::io::save_json(*out, j);
                return RunRecord{*out, {*in}, {*out}, {}};
            }};
}

Command fuse_command(CLI::App& root, bool)
{
    auto* sub = root.add_subcommand("fuse", "Weighted score-level fusion of two aligned score files");
    auto o = std::make_shared<OptionSet>(sub);
    auto c = std::make_shared<Common>();
    auto in = std::make_shared<std::vector<std::string>>();
    auto out = std::make_shared<std::string>();
    auto weights = std::make_shared<std::string>("0.5,0.5");
    auto norm = std::make_shared<std::string>("minmax");
    o->add("input", *in, "Score file (give exactly twice)")->required();
    o->add("output", *out, "Fused score file")->required();
    o->add("weights", *weights, "w1,w2 (non-negative, summing to 1)");
    o->add("normalization", *norm, "Per-set normalization")
        ->check(CLI::IsMember({"minmax", "zscore", "none"}));
    add_preset(*o, *c);
    return {sub, o, [=] {
                const auto w = parse_list<double>(*weights, "weights");
                if (w.size() != 2)
                    usage("--weights: expected two comma-separated numbers");
                const nsae::FusionConfig cfg{w[0], w[1],
                                             *norm == "minmax"   ? nsae::Normalization::MinMax
                                             : *norm == "zscore" ? nsae::Normalization::ZScore
                                                                 : nsae::Normalization::None};
                nsae::validate(cfg);
                if (in->size() != 2)
                    usage("--input: fuse takes exactly two score files");
                enter("fuse");
                const auto a = nsae::io::load_scores((*in)[0]);
                const auto b = nsae::io::load_scores((*in)[1]);
                if (a.trials != b.trials)
                    nsae::fail(nsae::ErrorCode::LengthMismatch, "score files list different trials");
                nsae::io::save_scores(*out, a.trials, nsae::fuse_scores(a.scores, b.scores, cfg));
                return RunRecord{*out, {(*in)[0], (*in)[1]}, {*out}, {}};
            }};
}

Command sweep_command(CLI::App& root, bool desk)
{
    auto* sub = root.add_subcommand(
        "sweep", "Run the full pipeline for each value of --k-list or --threshold-list");
    auto o = std::make_shared<OptionSet>(sub);
    auto c = std::make_shared<Common>();
    auto s = std::make_shared<SynthOpts>(desk);
    auto t = std::make_shared<TrainOpts>(desk);
    auto e = std::make_shared<EmbedOpts>();
    auto in = std::make_shared<std::string>();
    auto trials = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto scores_dir = std::make_shared<std::string>();
    auto k_list = std::make_shared<std::string>();
    auto t_list = std::make_shared<std::string>();
    auto baseline = std::make_shared<bool>(false);
    auto conv = std::make_shared<std::string>("nk");
    auto policy = std::make_shared<std::string>("zero");
    auto matched = std::make_shared<std::size_t>(300);
    auto mismatched = std::make_shared<std::size_t>(300);
    o->add("input", *in, "Vector file (omit to generate a synthetic dataset)");
    o->add("trials", *trials, "Trial file (required with --input)");
    o->add("output", *out, "Write the table here as well as to stdout");
    o->add("scores-dir", *scores_dir, "Write each run's score file into this directory");
    auto* kl = o->add("k-list", *k_list, "Comma-separated k values");
    auto* tl = o->add("threshold-list", *t_list, "Comma-separated thresholds");
    kl->excludes(tl);
    o->flag("with-baseline", *baseline, "Add a self-reconstruction row");
    o->add("convention", *conv, "Pair count convention: nk or nk-1")
        ->check(CLI::IsMember({"nk", "nk-1"}));
    o->add("zero-policy", *policy, "All-zero embeddings: score 0 or fail")
        ->check(CLI::IsMember({"zero", "error"}));
    s->add(*o);
    o->add("matched", *matched, "Matched trials for generated data");
    o->add("mismatched", *mismatched, "Mismatched trials for generated data");
    t->add(*o);
    e->add(*o);
    o->add("seed", c->seed, "Random seed");
    o->add("threads", c->threads, "Worker threads");
    o->flag("quiet", c->quiet, "No per-run progress on stderr");
    add_preset(*o, *c);
    return {sub, o, [=] {
                if (k_list->empty() && t_list->empty())
                    usage("sweep: one of --k-list or --threshold-list is required");
                const bool by_k = !k_list->empty();
                std::vector<double> values;
                if (by_k)
                    for (auto k : parse_list<std::size_t>(*k_list, "k-list"))
                        values.push_back(static_cast<double>(k));
                else
                    values = parse_list<double>(*t_list, "threshold-list");
                std::sort(values.begin(), values.end());
                values.erase(std::unique(values.begin(), values.end()), values.end());
                auto train = t->config(*c);
                if (!in->empty() && trials->empty())
                    usage("sweep: --trials is required with --input");

                RunRecord rec{*out, {}, {}, c->seed};
                enter("sweep: data", c->seed);
                nsae::Dataset data;
                nsae::TrialList trial_list;
                if (in->empty()) {
                    const auto ds = nsae::generate(s->config(c->seed));
                    data = ds.vectors;
                    trial_list = nsae::make_trials(ds, *matched, *mismatched, c->seed);
                } else {
                    data = nsae::io::load_vectors(*in);
                    trial_list = nsae::io::load_trials(*trials, data.size());
                    rec.inputs = {*in, *trials};
                }
                if (data.empty())
                    nsae::fail(nsae::ErrorCode::TooFewVectors, "sweep: no vectors");

                nsae::PipelineConfig base;
                base.arch = t->layer_sizes(data.front().size());
                base.train = train;
                base.convention = convention(*conv);
                base.fallback = t->fallback_mode();
                base.embed = e->options(c->threads);
                base.zero_policy = zero_policy(*policy);

                std::vector<nsae::PipelineConfig> runs;
                if (*baseline)
                    runs.push_back(base);
                for (double v : values) {
                    auto cfg = base;
                    if (by_k)
                        cfg.k = static_cast<std::size_t>(v);
                    else
                        cfg.threshold = v;
                    runs.push_back(cfg);
                }

                std::vector<nsae::SweepRow> rows;
                for (const auto& cfg : runs) {
                    const auto tag = nsae::source_tag(cfg);
                    enter("sweep: " + tag, c->seed);
                    const auto r = nsae::run_pipeline(data, trial_list, cfg);
                    warn_zero(r.scores);
                    if (!c->quiet)
                        std::fprintf(stderr, "%s: EER %.4f after %zu epochs\n", tag.c_str(),
                                     r.report.eer, r.train.epochs_run);
                    char param[32] = "-";
                    if (cfg.k)
                        std::snprintf(param, sizeof param, "%zu", *cfg.k);
                    else if (cfg.threshold)
                        std::snprintf(param, sizeof param, "%g", *cfg.threshold);
                    rows.push_back({cfg.k || cfg.threshold ? "NSAE" : "Baseline", param, r.report});
                    if (!scores_dir->empty()) {
                        fs::create_directories(*scores_dir);
                        const fs::path p = fs::path(*scores_dir) / (tag + ".tsv");
                        nsae::io::save_scores(p, trial_list, r.scores);
                        rec.outputs.push_back(p);
                    }
                }
                const auto table = nsae::sweep_report(rows, by_k ? "k" : "threshold");
                std::cout << table;
                if (!out->empty()) {
                    nsae::io::write_file_atomic(*out, table);
                    rec.outputs.insert(rec.outputs.begin(), fs::path(*out));
                }
                return rec;
            }};
}

int run(std::vector<std::string> args);

int rerun(const fs::path& manifest_file)
{
    enter("rerun");
    const auto manifest = json::parse(nsae::io::read_file(manifest_file), nullptr, false);
    if (manifest.is_discarded() || !manifest.contains("subcommand") || !manifest.contains("config"))
        nsae::fail(nsae::ErrorCode::ParseError, manifest_file.string() + ": not a run manifest");
    if (manifest.value("version", "") != nsae::kVersion)
        std::cerr << "nsae: warning: manifest written by version " << manifest.value("version", "?")
                  << ", running " << nsae::kVersion << "\n";

    std::vector<std::string> args{manifest["subcommand"].get<std::string>()};
    for (const auto& [key, value] : manifest["config"].items()) {
        if (value.is_null() || (value.is_boolean() && !value.get<bool>()))
            continue;
        if (value.is_boolean()) {
            args.push_back("--" + key);
        } else if (value.is_array()) {
            for (const auto& item : value) {
                args.push_back("--" + key);
                args.push_back(item.is_string() ? item.get<std::string>() : item.dump());
            }
        } else {
            args.push_back("--" + key);
            args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
    }

    const fs::path here = fs::current_path();
    if (manifest.contains("working_directory"))
        fs::current_path(manifest["working_directory"].get<std::string>());
    const int code = run(args);
    int result = code;
    if (code == kOk) {
        std::size_t differing = 0;
        for (const auto& entry : manifest["outputs"]) {
            const auto path = entry["path"].get<std::string>();
            const bool same = fs::exists(path) &&
                              nsae::io::file_checksum(path) == entry["fnv1a"].get<std::string>();
            std::cout << (same ? "identical " : "DIFFERS   ") << path << "\n";
            differing += !same;
        }
        if (differing > 0) {
            std::cerr << "nsae: rerun produced " << differing << " differing output(s)\n";
            result = kData;
        }
    }
    fs::current_path(here);
    return result;
}

int run(std::vector<std::string> args)
{
    const bool desk = desk_requested(args);
    CLI::App app{"Neighbor-reconstruction autoencoder toolkit", "nsae"};
    app.set_version_flag("--version", std::string(nsae::kVersion));
    app.set_config("--config", "", "TOML/INI file with per-subcommand sections");
    app.require_subcommand(1);

    std::vector<Command> commands{synth_command(app, desk),     trials_command(app, desk),
                                  neighbors_command(app, desk), train_command(app, desk),
                                  embed_command(app, desk),     score_command(app, desk),
                                  eval_command(app, desk),      fuse_command(app, desk),
                                  sweep_command(app, desk)};
    auto* rerun_cmd = app.add_subcommand("rerun", "Replay a run manifest and compare output checksums");
    std::string manifest_file;
    rerun_cmd->add_option("--manifest", manifest_file, "Manifest file")->required();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (rerun_cmd->parsed())
            return rerun(manifest_file);
        for (const auto& cmd : commands) {
            if (!cmd.app->parsed())
                continue;
            const auto start = std::chrono::steady_clock::now();
            const RunRecord rec = cmd.action();
            if (rec.primary.empty())
                return kOk;
            const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
            json m;
            m["tool"] = "nsae";
            m["version"] = nsae::kVersion;
            m["subcommand"] = cmd.app->get_name();
            m["config"] = cmd.opts->resolved();
            m["seed"] = rec.seed ? json(*rec.seed) : json();
            m["working_directory"] = fs::current_path().string();
            m["inputs"] = checksums(rec.inputs);
            m["outputs"] = checksums(rec.outputs);
            m["duration_seconds"] = took.count();
            nsae::io::save_json(manifest_path(rec.primary), m);
            return kOk;
        }
    } catch (const nsae::Error& e) {
        std::cerr << "nsae: " << g_stage.name;
        if (g_stage.seed)
            std::cerr << " (seed " << *g_stage.seed << ")";
        std::cerr << ": " << e.what() << "\n";
        switch (nsae::category(e.code())) {
        case nsae::ErrorCategory::Usage: return kUsage;
        case nsae::ErrorCategory::Numeric: return kNumeric;
        case nsae::ErrorCategory::Data: return kData;
        }
    } catch (const std::exception& e) {
        std::cerr << "nsae: " << g_stage.name << ": " << e.what() << "\n";
        return kData;
    }
    return kUsage;
}

} // namespace

int main(int argc, char** argv)
{
    return run(std::vector<std::string>(argv + 1, argv + argc));
}
