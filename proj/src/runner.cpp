#include "ppns/runner.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "ppns/csv.hpp"

namespace ppns {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out{};
    in >> out;
    if (in.fail() || !in.eof()) {
        throw std::invalid_argument("config key '" + key + "': cannot parse '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
    if (value == "0" || value == "false" || value == "no" || value == "off") return false;
    throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_number<int>(key, item));
    }
    return out;
}

std::string join(const std::vector<int>& values) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) out += ',';
        out += std::to_string(values[k]);
    }
    return out;
}

std::string fmt(double v) { return format_number(v); }

}  // namespace

const std::vector<std::string>& ExperimentConfig::keys() {
    static const std::vector<std::string> k = {
        "dataset",      "format",       "rating_threshold",  "split_ratio",      "split_seed",
        "dim",          "learning_rate", "regularization",   "epochs",           "batch_size",
        "init_scale",   "seed",         "sampler",           "m",                "beta",
        "aobpr_lambda", "pns_exponent", "srns_history_len",  "srns_variance_weight", "topk",
        "out",          "log_every",    "hist_epochs",       "hist_bins",        "inf_tn_gain",
        "inf_fn_penalty", "warm_start_epochs", "log_samples", "write_idmap",     "verbose",
    };
    return k;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "dataset") dataset = value;
    else if (key == "format") format = value;
    else if (key == "rating_threshold") {
        if (value.empty() || value == "none") rating_threshold.reset();
        else rating_threshold = parse_number<double>(key, value);
    }
    else if (key == "split_ratio") split_ratio = parse_number<double>(key, value);
    else if (key == "split_seed") split_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "dim") dim = parse_number<Index>(key, value);
    else if (key == "learning_rate") train.learning_rate = parse_number<double>(key, value);
    else if (key == "regularization") train.regularization = parse_number<double>(key, value);
    else if (key == "epochs") train.epochs = parse_number<int>(key, value);
    else if (key == "batch_size") train.batch_size = parse_number<int>(key, value);
    else if (key == "init_scale") train.embed_init_scale = parse_number<double>(key, value);
    else if (key == "seed") train.rng_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "sampler") sampler.kind = parse_sampler_kind(value);
    else if (key == "m") sampler.candidate_size = parse_number<int>(key, value);
    else if (key == "beta") sampler.beta = parse_number<double>(key, value);
    else if (key == "aobpr_lambda") {
        if (value.empty() || value == "auto") sampler.aobpr_lambda.reset();
        else sampler.aobpr_lambda = parse_number<double>(key, value);
    }
    else if (key == "pns_exponent") sampler.pns_exponent = parse_number<double>(key, value);
    else if (key == "srns_history_len") sampler.srns_history_len = parse_number<int>(key, value);
    else if (key == "srns_variance_weight") sampler.srns_variance_weight = parse_number<double>(key, value);
    else if (key == "topk") topk = parse_int_list(key, value);
    else if (key == "out") out = value;
    else if (key == "log_every") log_every = parse_number<int>(key, value);
    else if (key == "hist_epochs") hist_epochs = parse_int_list(key, value);
    else if (key == "hist_bins") hist_bins = parse_number<int>(key, value);
    else if (key == "inf_tn_gain") inf_tn_gain = parse_number<double>(key, value);
    else if (key == "inf_fn_penalty") inf_fn_penalty = parse_number<double>(key, value);
    else if (key == "warm_start_epochs") warm_start_epochs = parse_number<int>(key, value);
    else if (key == "log_samples") log_samples = parse_bool(key, value);
    else if (key == "write_idmap") write_idmap = parse_bool(key, value);
    else if (key == "verbose") verbose = parse_bool(key, value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string ExperimentConfig::get(const std::string& key) const {
    if (key == "dataset") return dataset;
    if (key == "format") return format;
    if (key == "rating_threshold") return rating_threshold ? fmt(*rating_threshold) : "none";
    if (key == "split_ratio") return fmt(split_ratio);
    if (key == "split_seed") return std::to_string(split_seed);
    if (key == "dim") return std::to_string(dim);
    if (key == "learning_rate") return fmt(train.learning_rate);
    if (key == "regularization") return fmt(train.regularization);
    if (key == "epochs") return std::to_string(train.epochs);
    if (key == "batch_size") return std::to_string(train.batch_size);
    if (key == "init_scale") return fmt(train.embed_init_scale);
    if (key == "seed") return std::to_string(train.rng_seed);
    if (key == "sampler") return std::string(to_string(sampler.kind));
    if (key == "m") return std::to_string(sampler.candidate_size);
    if (key == "beta") return fmt(sampler.beta);
    if (key == "aobpr_lambda") return sampler.aobpr_lambda ? fmt(*sampler.aobpr_lambda) : "auto";
    if (key == "pns_exponent") return fmt(sampler.pns_exponent);
    if (key == "srns_history_len") return std::to_string(sampler.srns_history_len);
    if (key == "srns_variance_weight") return fmt(sampler.srns_variance_weight);
    if (key == "topk") return join(topk);
    if (key == "out") return out;
    if (key == "log_every") return std::to_string(log_every);
    if (key == "hist_epochs") return join(hist_epochs);
    if (key == "hist_bins") return std::to_string(hist_bins);
    if (key == "inf_tn_gain") return fmt(inf_tn_gain);
    if (key == "inf_fn_penalty") return fmt(inf_fn_penalty);
    if (key == "warm_start_epochs") return std::to_string(warm_start_epochs);
    if (key == "log_samples") return log_samples ? "true" : "false";
    if (key == "write_idmap") return write_idmap ? "true" : "false";
    if (key == "verbose") return verbose ? "true" : "false";
    throw std::invalid_argument("unknown config key '" + key + "'");
}

void ExperimentConfig::validate() const {
    if (dataset.empty()) throw std::invalid_argument("config: dataset path is required");
    if (format != "tsv-uirt") throw std::invalid_argument("config: unsupported format '" + format + "'");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw std::invalid_argument("config: split_ratio must lie in (0, 1)");
    if (dim < 1) throw std::invalid_argument("config: dim must be >= 1");
    train.validate();
    sampler.validate();
    if (topk.empty()) throw std::invalid_argument("config: topk needs at least one K");
    for (const int k : topk) {
        if (k < 1) throw std::invalid_argument("config: topk values must be >= 1");
    }
    if (log_every < 1) throw std::invalid_argument("config: log_every must be >= 1");
    if (hist_bins < 1) throw std::invalid_argument("config: hist_bins must be >= 1");
    if (warm_start_epochs < 0) throw std::invalid_argument("config: warm_start_epochs must be >= 0");
    if (!(inf_tn_gain >= 0.0) || !(inf_fn_penalty >= 0.0)) {
        throw std::invalid_argument("config: INF weights must be >= 0");
    }
}

void ExperimentConfig::apply_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_number) + ": expected key = value");
        }
        set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    ExperimentConfig cfg;
    cfg.apply_text(buffer.str());
    return cfg;
}

std::string ExperimentConfig::to_text() const {
    std::string out;
    for (const auto& key : keys()) out += key + " = " + get(key) + '\n';
    return out;
}

std::string sampler_label(SamplerKind kind) {
    // The variance-aware baseline is a simplified score-plus-std variant.
    return kind == SamplerKind::srns ? "srns-lite" : std::string(to_string(kind));
}

const EpochReport& RunReport::last_evaluated() const {
    for (auto it = epochs.rbegin(); it != epochs.rend(); ++it) {
        if (!it->metrics.empty()) return *it;
    }
    throw std::logic_error("run report has no evaluated epoch");
}

SplitDataset load_experiment_data(const ExperimentConfig& cfg) {
    LoadOptions options;
    options.rating_threshold = cfg.rating_threshold;
    const auto data = load_ratings(cfg.dataset, options);
    return split(data, cfg.split_ratio, cfg.split_seed);
}

namespace {

std::string metrics_header(const std::vector<int>& ks) {
    std::string h = "epoch,sampler,tnr,inf";
    for (const int k : ks) {
        const auto s = std::to_string(k);
        h += ",p@" + s + ",r@" + s + ",ndcg@" + s;
    }
    return h;
}

void write_metrics_row(std::ostream& out, const std::string& label, const EpochReport& e) {
    out << e.epoch << ',' << label << ',' << fmt(e.tnr) << ',' << fmt(e.inf);
    for (const auto& m : e.metrics) out << ',' << fmt(m.precision) << ',' << fmt(m.recall) << ',' << fmt(m.ndcg);
    out << '\n';
}

// Independent streams derived from one user-facing seed.
Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

}  // namespace

RunReport run(const ExperimentConfig& cfg, const SplitDataset& data, const EpochCallback& on_epoch) {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    const std::filesystem::path out_dir(cfg.out);
    std::filesystem::create_directories(out_dir);
    auto metrics_csv = open_csv(out_dir / "epoch_metrics.csv", metrics_header(cfg.topk));
    std::ofstream samples_csv;
    if (cfg.log_samples) {
        samples_csv = open_csv(out_dir / "samples.csv", "epoch,user,positive,negative,score,info,unbias,label");
    }
    if (cfg.write_idmap) write_id_maps(data.train, out_dir);

    const auto& train = data.train;
    const std::string label = sampler_label(cfg.sampler.kind);

    auto model = init_model<double>(train.num_users(), train.num_items(), cfg.dim, cfg.train.embed_init_scale,
                                    cfg.train.rng_seed);
    NegativeSampler<double> sampler(cfg.sampler, train);
    std::optional<NegativeSampler<double>> warmup;
    if (cfg.warm_start_epochs > 0) {
        SamplerConfig rns = cfg.sampler;
        rns.kind = SamplerKind::rns;
        warmup.emplace(rns, train);
    }
    Rng order_rng = make_stream(cfg.train.rng_seed, 1);
    Rng sample_rng = make_stream(cfg.train.rng_seed, 2);

    std::vector<Interaction> pairs;
    pairs.reserve(train.size());
    for (const auto& p : train.pairs()) {
        if (train.num_negatives(p.user) > 0) pairs.push_back(p);
    }

    RunReport report;
    report.config = cfg;
    report.train_pairs = train.size();
    report.eligible_pairs = pairs.size();

    const auto batch = static_cast<std::size_t>(cfg.train.batch_size);
    std::vector<Triple> triples;
    triples.reserve(batch);
    for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        auto& active = (warmup && epoch <= cfg.warm_start_epochs) ? *warmup : sampler;
        std::shuffle(pairs.begin(), pairs.end(), order_rng);

        SamplingTally tally;
        for (std::size_t start = 0; start < pairs.size(); start += batch) {
            const auto stop = std::min(pairs.size(), start + batch);
            triples.clear();
            // Negatives for a batch are all drawn against the model as it stood at batch start.
            for (std::size_t k = start; k < stop; ++k) {
                const auto& p = pairs[k];
                const auto neg = active.sample(p.user, p.item, model, sample_rng);
                const auto lab = label_of(data.test, p.user, neg.item);
                tally.add(lab, neg.info);
                if (cfg.log_samples) {
                    samples_csv << epoch << ',' << p.user << ',' << p.item << ',' << neg.item << ','
                                << fmt(neg.score) << ',' << fmt(neg.info) << ','
                                << (neg.unbias ? fmt(*neg.unbias) : "") << ','
                                << (lab == NegativeLabel::true_negative ? "TN" : "FN") << '\n';
                }
                triples.push_back({p.user, p.item, neg.item});
            }
            for (const auto& t : triples) {
                try {
                    sgd_step(model, t, cfg.train);
                } catch (const DivergenceError& e) {
                    throw DivergenceError("epoch " + std::to_string(epoch) + ": " + e.what());
                }
            }
        }

        EpochReport er;
        er.epoch = epoch;
        er.triples = tally.total();
        if (tally.total() > 0) {
            er.tnr = tally.tnr();
            er.inf = tally.inf(cfg.inf_tn_gain, cfg.inf_fn_penalty);
        }
        const bool evaluate = epoch % cfg.log_every == 0 || epoch == cfg.train.epochs;
        if (evaluate && !data.test.empty()) {
            er.metrics = topk(model, data, std::span<const int>(cfg.topk));
            write_metrics_row(metrics_csv, label, er);
        }
        if (std::find(cfg.hist_epochs.begin(), cfg.hist_epochs.end(), epoch) != cfg.hist_epochs.end()) {
            auto hist = collect_score_histograms(model, data, epoch, cfg.hist_bins);
            write_histogram_csv(out_dir / ("score_hist_epoch" + std::to_string(epoch) + ".csv"), hist);
            report.histograms.push_back(std::move(hist));
        }
        er.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
        if (on_epoch) on_epoch(er);
        report.epochs.push_back(std::move(er));
    }
    metrics_csv.flush();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    std::ofstream summary(out_dir / "summary.txt");
    summary << "# config\n" << cfg.to_text();
    summary << "# run\n";
    summary << "sampler_label = " << label << '\n';
    summary << "users = " << train.num_users() << "\nitems = " << train.num_items() << '\n';
    summary << "train_pairs = " << train.size() << "\ntest_pairs = " << data.test.size() << '\n';
    summary << "triples_per_epoch = " << report.eligible_pairs << '\n';
    summary << "wall_seconds = " << report.wall_seconds << '\n';
    summary << "seconds_per_epoch = " << report.wall_seconds / cfg.train.epochs << '\n';
    if (!data.test.empty()) {
        const auto& last = report.last_evaluated();
        summary << "# final (epoch " << last.epoch << ")\n";
        summary << "tnr = " << fmt(last.tnr) << "\ninf = " << fmt(last.inf) << '\n';
        for (const auto& m : last.metrics) {
            summary << "p@" << m.k << " = " << fmt(m.precision) << "\nr@" << m.k << " = " << fmt(m.recall)
                    << "\nndcg@" << m.k << " = " << fmt(m.ndcg) << '\n';
        }
    }
    return report;
}

RunReport run(const ExperimentConfig& cfg) {
    cfg.validate();
    return run(cfg, load_experiment_data(cfg));
}

ComparisonReport compare(const std::vector<ExperimentConfig>& cfgs, const std::filesystem::path& out,
                         const EpochCallback& on_epoch) {
    if (cfgs.size() < 2) throw std::invalid_argument("compare: need at least two configs");
    const auto& ref = cfgs.front();
    for (const auto& c : cfgs) {
        c.validate();
        if (c.dataset != ref.dataset || c.format != ref.format || c.split_ratio != ref.split_ratio ||
            c.split_seed != ref.split_seed || c.rating_threshold != ref.rating_threshold) {
            throw std::invalid_argument("compare: configs must share dataset and split");
        }
        if (c.topk != ref.topk) throw std::invalid_argument("compare: configs must share topk");
    }
    const auto data = load_experiment_data(ref);

    ComparisonReport report;
    for (std::size_t k = 0; k < cfgs.size(); ++k) {
        auto cfg = cfgs[k];
        cfg.out = (out / (std::to_string(k) + "_" + sampler_label(cfg.sampler.kind))).string();
        report.runs.push_back(run(cfg, data, on_epoch));
    }

    std::string header = "sampler";
    for (const int k : ref.topk) {
        const auto s = std::to_string(k);
        header += ",p@" + s + ",r@" + s + ",ndcg@" + s;
    }
    header += ",final_tnr,final_inf";
    auto table = open_csv(out / "comparison.csv", header);
    for (const auto& r : report.runs) {
        const auto& last = r.last_evaluated();
        table << sampler_label(r.config.sampler.kind);
        for (const auto& m : last.metrics) table << ',' << fmt(m.precision) << ',' << fmt(m.recall) << ',' << fmt(m.ndcg);
        table << ',' << fmt(last.tnr) << ',' << fmt(last.inf) << '\n';
    }

    auto curves = open_csv(out / "curves.csv", "epoch,sampler,tnr,inf");
    for (const auto& r : report.runs) {
        for (const auto& e : r.epochs) {
            curves << e.epoch << ',' << sampler_label(r.config.sampler.kind) << ',' << fmt(e.tnr) << ','
                   << fmt(e.inf) << '\n';
        }
    }
    return report;
}

}  // namespace ppns
