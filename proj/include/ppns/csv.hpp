#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "ppns/negative_stats.hpp"

namespace ppns {

// Shortest round-trip decimal form; identical input gives identical text.
std::string format_number(double value);

std::ofstream open_csv(const std::filesystem::path& path, const std::string& header);

struct FamilyCurves {
    std::string family;
    std::vector<DensityRow> rows;
};

// density_curves.csv: family,x,f,g,h
void write_density_curves_csv(const std::filesystem::path& path, std::span<const FamilyCurves> curves);

// score_hist_epoch{E}.csv: bin_lo,bin_hi,tn_density,fn_density
void write_histogram_csv(const std::filesystem::path& path, const ScoreHistogramPair& hist);

// unbias_surface.csv: F,pfn,unbias
void write_unbias_surface_csv(const std::filesystem::path& path, std::span<const SurfaceRow> rows);

}  // namespace ppns
