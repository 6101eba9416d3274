#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppns/dataset.hpp"
#include "ppns/mf_model.hpp"

namespace ppns {

enum class DensityFamily { gaussian, student, gamma, empirical };

/// A score density f with its CDF F.
///
/// Unlabeled scores are modeled as i.i.d. draws from f; the true- and
/// false-negative class densities follow from f and F alone.
class BaseDensity {
public:
    static BaseDensity gaussian(double mean, double stddev);
    static BaseDensity student(double dof);
    // Shape alpha, rate lambda.
    static BaseDensity gamma(double shape, double rate);
    // Piecewise-constant density over `edges` (size bins + 1); renormalized to integrate to 1.
    static BaseDensity empirical(std::vector<double> edges, std::vector<double> densities);

    DensityFamily family() const { return family_; }
    std::string name() const;

    double pdf(double x) const;
    double cdf(double x) const;

    // May be infinite.
    double lower() const;
    double upper() const;

    // Finite interval holding all but a negligible tail of the mass.
    std::pair<double, double> integration_bounds() const;

private:
    BaseDensity() = default;

    DensityFamily family_ = DensityFamily::gaussian;
    double a_ = 0.0;
    double b_ = 1.0;
    std::vector<double> edges_;
    std::vector<double> densities_;
    std::vector<double> cumulative_;
};

// g(x) = 2 f(x) [1 - F(x)]: density of the lower of two i.i.d. scores.
double tn_density(const BaseDensity& base, double x);

// h(x) = 2 F(x) f(x): density of the upper of two i.i.d. scores.
double fn_density(const BaseDensity& base, double x);

// Composite Simpson rule; an odd panel count is bumped to the next even one.
double integrate(const std::function<double(double)>& fn, double lo, double hi, int panels);

// Running integral from grid.front() to each grid point, Simpson between neighbours.
std::vector<double> cumulative_integral(const std::function<double(double)>& fn, std::span<const double> grid,
                                        int panels_per_step = 10);

struct DensityRow {
    double x;
    double f;
    double g;
    double h;
};

std::vector<DensityRow> density_curves(const BaseDensity& base, std::span<const double> grid);

struct DensityPreset {
    std::string family;
    BaseDensity base;
};

// gaussian(0, 1), student(5), gamma(2, 1): representative shapes, not fitted values.
std::vector<DensityPreset> density_presets();
DensityPreset density_preset(const std::string& family);

// `count` evenly spaced points spanning lo..hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t count);

struct ScoreHistogramPair {
    int epoch = 0;
    std::vector<double> edges;  // bins + 1 shared edges
    std::vector<double> tn_density;
    std::vector<double> fn_density;
    double tn_mean = 0.0;
    double fn_mean = 0.0;
    std::size_t tn_count = 0;
    std::size_t fn_count = 0;

    bool tn_empty() const { return tn_count == 0; }
    bool fn_empty() const { return fn_count == 0; }
};

// Shared equal-width bins over the pooled range of both samples, each normalized to a density.
ScoreHistogramPair build_histogram_pair(int epoch, std::span<const double> tn_scores, std::span<const double> fn_scores,
                                        int bins);

/// Scores every (user, item) outside the user's train positives and splits
/// them by ground truth: items held out in the test set are false
/// negatives, the rest true negatives.
template <typename Scalar>
ScoreHistogramPair collect_score_histograms(const MatrixFactorization<Scalar>& model, const SplitDataset& data,
                                            int epoch, int bins = 100) {
    if (data.test.empty()) throw std::invalid_argument("collect_score_histograms: empty test set");
    std::vector<double> tn;
    std::vector<double> fn;
    for (Index u = 0; u < data.train.num_users(); ++u) {
        const auto scores = model.score_vector(u);
        const auto pos = data.train.positives(u);
        auto p = pos.begin();
        for (Index j = 0; j < model.num_items(); ++j) {
            if (p != pos.end() && *p == j) {
                ++p;
                continue;
            }
            (data.test.contains(u, j) ? fn : tn).push_back(static_cast<double>(scores[j]));
        }
    }
    return build_histogram_pair(epoch, tn, fn, bins);
}

struct SurfaceRow {
    double F;
    double pfn;
    double unbias;
};

std::vector<SurfaceRow> unbias_surface(std::span<const double> grid_F, std::span<const double> grid_pfn);

}  // namespace ppns
