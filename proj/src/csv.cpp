#include "ppns/csv.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace ppns {

std::string format_number(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
    return std::string(buf.data(), ptr);
}

std::ofstream open_csv(const std::filesystem::path& path, const std::string& header) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << header << '\n';
    return out;
}

void write_density_curves_csv(const std::filesystem::path& path, std::span<const FamilyCurves> curves) {
    auto out = open_csv(path, "family,x,f,g,h");
    for (const auto& c : curves) {
        for (const auto& r : c.rows) {
            out << c.family << ',' << format_number(r.x) << ',' << format_number(r.f) << ',' << format_number(r.g)
                << ',' << format_number(r.h) << '\n';
        }
    }
}

void write_histogram_csv(const std::filesystem::path& path, const ScoreHistogramPair& hist) {
    auto out = open_csv(path, "bin_lo,bin_hi,tn_density,fn_density");
    for (std::size_t k = 0; k + 1 < hist.edges.size(); ++k) {
        out << format_number(hist.edges[k]) << ',' << format_number(hist.edges[k + 1]) << ','
            << format_number(hist.tn_density[k]) << ',' << format_number(hist.fn_density[k]) << '\n';
    }
}

void write_unbias_surface_csv(const std::filesystem::path& path, std::span<const SurfaceRow> rows) {
    auto out = open_csv(path, "F,pfn,unbias");
    for (const auto& r : rows) {
        out << format_number(r.F) << ',' << format_number(r.pfn) << ',' << format_number(r.unbias) << '\n';
    }
}

}  // namespace ppns
