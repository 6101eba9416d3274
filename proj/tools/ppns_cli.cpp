// Command-line driver: train, compare, densities.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "ppns/csv.hpp"
#include "ppns/negative_stats.hpp"
#include "ppns/runner.hpp"

namespace {

using ppns::ExperimentConfig;

// Registers `--<key>` for every config key; values land in `overrides`.
void add_config_flags(CLI::App& cmd, std::map<std::string, std::string>& overrides) {
    for (const auto& key : ExperimentConfig::keys()) {
        cmd.add_option("--" + key, overrides[key], "override config key '" + key + "'");
    }
}

ExperimentConfig build_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
    ExperimentConfig cfg;
    if (!path.empty()) cfg = ExperimentConfig::from_file(path);
    for (const auto& [key, value] : overrides) {
        if (!value.empty()) cfg.set(key, value);
    }
    return cfg;
}

void print_epoch(const ppns::EpochReport& e) {
    std::fprintf(stderr, "epoch %3d  tnr %.4f  inf %.4f", e.epoch, e.tnr, e.inf);
    for (const auto& m : e.metrics) std::fprintf(stderr, "  ndcg@%d %.4f", m.k, m.ndcg);
    std::fprintf(stderr, "  (%.2fs)\n", e.seconds);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MF training with pluggable negative samplers"};
    app.require_subcommand(1);

    std::string train_config;
    std::map<std::string, std::string> train_overrides;
    auto* train = app.add_subcommand("train", "train one model and write epoch_metrics.csv and friends");
    train->add_option("--config", train_config, "flat key = value config file");
    add_config_flags(*train, train_overrides);

    std::string compare_config;
    std::string compare_samplers;
    std::map<std::string, std::string> compare_overrides;
    auto* cmp = app.add_subcommand("compare", "train one model per sampler on a shared split");
    cmp->add_option("--config", compare_config, "flat key = value config file");
    cmp->add_option("--samplers", compare_samplers, "comma-separated sampler list")->required();
    add_config_flags(*cmp, compare_overrides);

    std::string family = "all";
    std::string density_out = "densities";
    std::size_t points = 1000;
    std::size_t surface_points = 101;
    auto* dens = app.add_subcommand("densities", "write true/false negative density curves and the unbias surface");
    dens->add_option("--family", family, "gaussian, student, gamma or all")
        ->check(CLI::IsMember({"gaussian", "student", "gamma", "all"}));
    dens->add_option("--out", density_out, "output directory");
    dens->add_option("--points", points, "grid points per family")->check(CLI::PositiveNumber);
    dens->add_option("--surface-points", surface_points, "unbias surface grid size per axis")
        ->check(CLI::Range(std::size_t{2}, std::size_t{10001}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            auto cfg = build_config(train_config, train_overrides);
            const auto report = ppns::run(cfg, ppns::load_experiment_data(cfg),
                                          cfg.verbose ? ppns::EpochCallback(print_epoch) : ppns::EpochCallback{});
            const auto& last = report.last_evaluated();
            std::printf("%s: epoch %d tnr %.4f inf %.4f", ppns::sampler_label(cfg.sampler.kind).c_str(), last.epoch,
                        last.tnr, last.inf);
            for (const auto& m : last.metrics) std::printf(" ndcg@%d %.4f", m.k, m.ndcg);
            std::printf("\nwrote %s\n", cfg.out.c_str());
        } else if (*cmp) {
            const auto base = build_config(compare_config, compare_overrides);
            std::vector<ExperimentConfig> cfgs;
            for (const auto& name : split_list(compare_samplers)) {
                auto cfg = base;
                cfg.sampler.kind = ppns::parse_sampler_kind(name);
                cfgs.push_back(cfg);
            }
            const auto report = ppns::compare(cfgs, base.out,
                                              base.verbose ? ppns::EpochCallback(print_epoch) : ppns::EpochCallback{});
            for (const auto& r : report.runs) {
                const auto& last = r.last_evaluated();
                std::printf("%-10s", ppns::sampler_label(r.config.sampler.kind).c_str());
                for (const auto& m : last.metrics) std::printf("  ndcg@%d %.4f", m.k, m.ndcg);
                std::printf("  tnr %.4f\n", last.tnr);
            }
            std::printf("wrote %s\n", base.out.c_str());
        } else if (*dens) {
            std::vector<ppns::FamilyCurves> curves;
            for (const auto& preset : ppns::density_presets()) {
                if (family != "all" && preset.family != family) continue;
                const auto [lo, hi] = preset.base.integration_bounds();
                // Plot range: the bulk of the mass, not the full quadrature interval.
                const double plot_hi = preset.base.family() == ppns::DensityFamily::gamma ? 12.0 : std::min(hi, 6.0);
                const double plot_lo = std::max(lo, -6.0);
                const auto grid = ppns::linspace(plot_lo, plot_hi, points);
                curves.push_back({preset.family, ppns::density_curves(preset.base, grid)});
            }
            const std::filesystem::path out(density_out);
            ppns::write_density_curves_csv(out / "density_curves.csv", curves);
            const auto grid = ppns::linspace(0.0, 1.0, surface_points);
            ppns::write_unbias_surface_csv(out / "unbias_surface.csv", ppns::unbias_surface(grid, grid));
            std::printf("wrote %s\n", out.string().c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
