#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppns/dataset.hpp"
#include "ppns/evaluation.hpp"
#include "ppns/mf_model.hpp"
#include "ppns/negative_stats.hpp"
#include "ppns/samplers.hpp"

namespace ppns {

/// Everything needed to reproduce one training run. Serialized as flat
/// `key = value` text; every key can also be passed as `--key value`.
struct ExperimentConfig {
    std::string dataset;
    std::string format = "tsv-uirt";
    std::optional<double> rating_threshold;
    double split_ratio = 0.8;
    std::uint64_t split_seed = 0;

    Index dim = 32;
    TrainConfig train;  // train.rng_seed is the `seed` key
    SamplerConfig sampler;

    std::vector<int> topk = {5, 10, 20};
    std::string out = "out";
    int log_every = 1;
    std::vector<int> hist_epochs;
    int hist_bins = 100;
    double inf_tn_gain = 1.0;
    double inf_fn_penalty = 1.0;
    int warm_start_epochs = 0;  // epochs trained with RNS before switching to `sampler`
    bool log_samples = false;
    bool write_idmap = false;
    bool verbose = false;

    static const std::vector<std::string>& keys();

    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    void validate() const;

    static ExperimentConfig from_file(const std::filesystem::path& path);
    void apply_text(const std::string& text);
    std::string to_text() const;
};

std::string sampler_label(SamplerKind kind);

struct EpochReport {
    int epoch = 0;
    std::size_t triples = 0;
    double tnr = 0.0;
    double inf = 0.0;
    std::vector<TopKMetrics> metrics;  // empty on epochs without evaluation
    double seconds = 0.0;
};

struct RunReport {
    ExperimentConfig config;
    std::size_t train_pairs = 0;
    std::size_t eligible_pairs = 0;  // train pairs whose user has at least one negative
    std::vector<EpochReport> epochs;
    std::vector<ScoreHistogramPair> histograms;
    double wall_seconds = 0.0;

    const EpochReport& last_evaluated() const;
};

SplitDataset load_experiment_data(const ExperimentConfig& cfg);

// Called once per epoch; handy for progress output.
using EpochCallback = std::function<void(const EpochReport&)>;

/// Trains MF with the configured sampler and writes every artifact under
/// cfg.out. `data` must come from load_experiment_data(cfg) or an
/// equivalent split.
RunReport run(const ExperimentConfig& cfg, const SplitDataset& data, const EpochCallback& on_epoch = {});
RunReport run(const ExperimentConfig& cfg);

struct ComparisonReport {
    std::vector<RunReport> runs;
};

// Runs configs that differ only in their sampler and writes comparison.csv and curves.csv to `out`.
ComparisonReport compare(const std::vector<ExperimentConfig>& cfgs, const std::filesystem::path& out,
                         const EpochCallback& on_epoch = {});

}  // namespace ppns
