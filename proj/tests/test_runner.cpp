#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "ppns/csv.hpp"
#include "ppns/runner.hpp"

using namespace ppns;
namespace fs = std::filesystem;

namespace {

// 3 users x 8 items; every user keeps several negatives.
std::string toy_ratings() {
    std::ostringstream out;
    const int rows[][2] = {{1, 10}, {1, 11}, {1, 12}, {1, 13}, {2, 11}, {2, 14}, {2, 15},
                           {2, 16}, {3, 10}, {3, 12}, {3, 16}, {3, 17}, {1, 17}, {2, 10}};
    int t = 0;
    for (const auto& r : rows) out << r[0] << '\t' << r[1] << "\t4\t" << 1000 + t++ << '\n';
    return out.str();
}

ExperimentConfig toy_config(const fs::path& dir, const std::string& name) {
    ExperimentConfig cfg;
    cfg.dataset = oracle::write_file(dir / "toy.data", toy_ratings()).string();
    cfg.out = (dir / name).string();
    cfg.dim = 4;
    cfg.train.epochs = 3;
    cfg.train.embed_init_scale = 0.1;
    cfg.train.rng_seed = 5;
    cfg.topk = {1, 3};
    return cfg;
}

std::size_t line_count(const fs::path& p) {
    const auto text = oracle::read_file(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("run: one epoch of RNS on a 3-user toy") {
    const auto dir = oracle::temp_dir("runner_single");
    auto cfg = toy_config(dir, "run");
    cfg.train.epochs = 1;
    cfg.log_samples = true;
    const auto data = load_experiment_data(cfg);
    const auto report = run(cfg, data);
    REQUIRE(report.epochs.size() == 1);
    CHECK(report.epochs[0].triples == data.train.size());
    CHECK(report.eligible_pairs == data.train.size());
    CHECK(line_count(fs::path(cfg.out) / "samples.csv") == 1 + data.train.size());
    CHECK(line_count(fs::path(cfg.out) / "epoch_metrics.csv") == 2);
    CHECK(fs::exists(fs::path(cfg.out) / "summary.txt"));
    const auto metrics = oracle::read_file(fs::path(cfg.out) / "epoch_metrics.csv");
    CHECK(metrics.rfind("epoch,sampler,tnr,inf,p@1,r@1,ndcg@1,p@3,r@3,ndcg@3\n1,rns,", 0) == 0);
}

TEST_CASE("run: triple count excludes users without negatives") {
    const auto dir = oracle::temp_dir("runner_full_user");
    ExperimentConfig cfg = toy_config(dir, "run");
    cfg.train.epochs = 2;
    // User 0 owns every item; user 1 owns one.
    SplitDataset data{InteractionSet(2, 3, {{0, 0}, {0, 1}, {0, 2}, {1, 0}}), InteractionSet(2, 3, {{1, 2}}), 0, 0.8};
    const auto report = run(cfg, data);
    CHECK(report.train_pairs == 4);
    CHECK(report.eligible_pairs == 1);
    for (const auto& e : report.epochs) CHECK(e.triples == 1);
}

TEST_CASE("run: every sampler is byte-for-byte reproducible") {
    const auto dir = oracle::temp_dir("runner_determinism");
    for (const auto kind : {SamplerKind::rns, SamplerKind::pns, SamplerKind::aobpr, SamplerKind::dns, SamplerKind::srns,
                            SamplerKind::ppns}) {
        const auto name = std::string(to_string(kind));
        auto a = toy_config(dir, name + "_a");
        a.sampler.kind = kind;
        a.sampler.candidate_size = 3;
        a.hist_epochs = {1, 3};
        a.hist_bins = 5;
        a.log_samples = true;
        auto b = a;
        b.out = (dir / (name + "_b")).string();
        run(a);
        run(b);
        for (const auto* file : {"epoch_metrics.csv", "samples.csv", "score_hist_epoch1.csv", "score_hist_epoch3.csv"}) {
            CAPTURE(name);
            CAPTURE(file);
            const auto left = oracle::read_file(fs::path(a.out) / file);
            CHECK_FALSE(left.empty());
            CHECK(left == oracle::read_file(fs::path(b.out) / file));
        }
    }
}

TEST_CASE("run: a different seed changes the trajectory") {
    const auto dir = oracle::temp_dir("runner_seed");
    auto a = toy_config(dir, "a");
    a.log_samples = true;
    auto b = a;
    b.out = (dir / "b").string();
    b.train.rng_seed = 6;
    run(a);
    run(b);
    CHECK(oracle::read_file(fs::path(a.out) / "samples.csv") != oracle::read_file(fs::path(b.out) / "samples.csv"));
}

TEST_CASE("run: log_every thins the metrics rows but keeps the last epoch") {
    const auto dir = oracle::temp_dir("runner_log_every");
    auto cfg = toy_config(dir, "run");
    cfg.train.epochs = 5;
    cfg.log_every = 2;
    const auto report = run(cfg);
    CHECK(line_count(fs::path(cfg.out) / "epoch_metrics.csv") == 1 + 3);  // epochs 2, 4, 5
    CHECK(report.last_evaluated().epoch == 5);
    CHECK(report.epochs[0].metrics.empty());
}

TEST_CASE("run: divergence names the epoch") {
    const auto dir = oracle::temp_dir("runner_diverge");
    auto cfg = toy_config(dir, "run");
    cfg.train.learning_rate = 1e200;
    cfg.train.embed_init_scale = 1e100;
    try {
        run(cfg);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
    }
}

TEST_CASE("config text round trip and overrides") {
    ExperimentConfig cfg;
    cfg.apply_text(
        "# comment\n"
        "dataset = data/x.tsv\n"
        "sampler = ppns\n"
        "m = 7\n"
        "beta = 2.5\n"
        "topk = 5,10\n"
        "hist_epochs = 1,50\n"
        "rating_threshold = 4\n"
        "log_samples = true\n");
    CHECK(cfg.dataset == "data/x.tsv");
    CHECK(cfg.sampler.kind == SamplerKind::ppns);
    CHECK(cfg.sampler.candidate_size == 7);
    CHECK(cfg.sampler.beta == 2.5);
    CHECK(cfg.topk == std::vector<int>{5, 10});
    CHECK(cfg.hist_epochs == std::vector<int>{1, 50});
    CHECK(cfg.rating_threshold == 4.0);
    CHECK(cfg.log_samples);

    ExperimentConfig again;
    again.apply_text(cfg.to_text());
    CHECK(again.to_text() == cfg.to_text());
    for (const auto& key : ExperimentConfig::keys()) CHECK(again.get(key) == cfg.get(key));

    CHECK_THROWS_AS(cfg.set("no_such_key", "1"), std::invalid_argument);
    CHECK_THROWS_AS(cfg.set("m", "many"), std::invalid_argument);
    CHECK_THROWS_AS(cfg.apply_text("dataset\n"), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::from_file("/nonexistent/config.txt"), std::runtime_error);

    ExperimentConfig bad;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // no dataset
    bad.dataset = "x";
    bad.split_ratio = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("compare: identical configs give identical rows; mismatches are rejected") {
    const auto dir = oracle::temp_dir("runner_compare");
    const auto cfg = toy_config(dir, "unused");
    const auto report = compare({cfg, cfg}, dir / "cmp");
    REQUIRE(report.runs.size() == 2);
    const auto table = oracle::read_file(dir / "cmp" / "comparison.csv");
    std::istringstream in(table);
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    CHECK(header == "sampler,p@1,r@1,ndcg@1,p@3,r@3,ndcg@3,final_tnr,final_inf");
    CHECK(row1 == row2);
    CHECK(line_count(dir / "cmp" / "curves.csv") == 1 + 2 * 3);

    auto other = cfg;
    other.split_seed = 9;
    CHECK_THROWS_AS(compare({cfg, other}, dir / "bad"), std::invalid_argument);
    CHECK_THROWS_AS(compare({cfg}, dir / "bad"), std::invalid_argument);
    auto other_k = cfg;
    other_k.topk = {2};
    CHECK_THROWS_AS(compare({cfg, other_k}, dir / "bad"), std::invalid_argument);
}

TEST_CASE("compare: every sampler shares one schema") {
    const auto dir = oracle::temp_dir("runner_compare_all");
    std::vector<ExperimentConfig> cfgs;
    for (const auto kind : {SamplerKind::rns, SamplerKind::pns, SamplerKind::aobpr, SamplerKind::dns, SamplerKind::srns,
                            SamplerKind::ppns}) {
        auto c = toy_config(dir, "x");
        c.sampler.kind = kind;
        c.sampler.candidate_size = 3;
        cfgs.push_back(c);
    }
    compare(cfgs, dir / "cmp");
    std::istringstream in(oracle::read_file(dir / "cmp" / "comparison.csv"));
    std::string line;
    std::vector<std::string> labels;
    std::getline(in, line);
    const auto columns = std::count(line.begin(), line.end(), ',');
    while (std::getline(in, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == columns);
        labels.push_back(line.substr(0, line.find(',')));
    }
    CHECK(labels == std::vector<std::string>{"rns", "pns", "aobpr", "dns", "srns-lite", "ppns"});
}

TEST_CASE("format_number is shortest round-trip") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(0.30000000000000004) == "0.30000000000000004");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
