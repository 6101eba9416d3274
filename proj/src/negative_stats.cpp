#include "ppns/negative_stats.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ppns/samplers.hpp"

namespace ppns {

namespace {

constexpr double kTail = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

BaseDensity BaseDensity::gaussian(double mean, double stddev) {
    if (!(stddev > 0.0)) throw std::invalid_argument("gaussian: stddev must be > 0");
    BaseDensity d;
    d.family_ = DensityFamily::gaussian;
    d.a_ = mean;
    d.b_ = stddev;
    return d;
}

BaseDensity BaseDensity::student(double dof) {
    if (!(dof > 0.0)) throw std::invalid_argument("student: degrees of freedom must be > 0");
    BaseDensity d;
    d.family_ = DensityFamily::student;
    d.a_ = dof;
    return d;
}

BaseDensity BaseDensity::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gamma: shape and rate must be > 0");
    BaseDensity d;
    d.family_ = DensityFamily::gamma;
    d.a_ = shape;
    d.b_ = rate;
    return d;
}

BaseDensity BaseDensity::empirical(std::vector<double> edges, std::vector<double> densities) {
    if (edges.size() < 2 || densities.size() + 1 != edges.size()) {
        throw std::invalid_argument("empirical: need bins + 1 edges");
    }
    if (!std::is_sorted(edges.begin(), edges.end())) throw std::invalid_argument("empirical: edges must be sorted");
    BaseDensity d;
    d.family_ = DensityFamily::empirical;
    d.cumulative_.assign(edges.size(), 0.0);
    for (std::size_t k = 0; k < densities.size(); ++k) {
        if (densities[k] < 0.0) throw std::invalid_argument("empirical: negative density");
        d.cumulative_[k + 1] = d.cumulative_[k] + densities[k] * (edges[k + 1] - edges[k]);
    }
    const double mass = d.cumulative_.back();
    if (!(mass > 0.0)) throw std::invalid_argument("empirical: zero total mass");
    for (auto& v : densities) v /= mass;
    for (auto& c : d.cumulative_) c /= mass;
    d.edges_ = std::move(edges);
    d.densities_ = std::move(densities);
    return d;
}

std::string BaseDensity::name() const {
    switch (family_) {
        case DensityFamily::gaussian: return "gaussian";
        case DensityFamily::student: return "student";
        case DensityFamily::gamma: return "gamma";
        case DensityFamily::empirical: return "empirical";
    }
    return "unknown";
}

double BaseDensity::pdf(double x) const {
    switch (family_) {
        case DensityFamily::gaussian:
            if (std::isinf(x)) return 0.0;
            return boost::math::pdf(boost::math::normal_distribution<>(a_, b_), x);
        case DensityFamily::student:
            if (std::isinf(x)) return 0.0;
            return boost::math::pdf(boost::math::students_t_distribution<>(a_), x);
        case DensityFamily::gamma:
            if (x < 0.0 || std::isinf(x)) return 0.0;
            return boost::math::pdf(boost::math::gamma_distribution<>(a_, 1.0 / b_), x);
        case DensityFamily::empirical: {
            if (x < edges_.front() || x > edges_.back()) return 0.0;
            auto k = static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), x) - edges_.begin());
            k = std::min(k, densities_.size());
            return densities_[k - 1];
        }
    }
    return 0.0;
}

double BaseDensity::cdf(double x) const {
    if (x == -kInf) return 0.0;
    if (x == kInf) return 1.0;
    switch (family_) {
        case DensityFamily::gaussian:
            return boost::math::cdf(boost::math::normal_distribution<>(a_, b_), x);
        case DensityFamily::student:
            return boost::math::cdf(boost::math::students_t_distribution<>(a_), x);
        case DensityFamily::gamma:
            if (x <= 0.0) return 0.0;
            return boost::math::cdf(boost::math::gamma_distribution<>(a_, 1.0 / b_), x);
        case DensityFamily::empirical: {
            if (x <= edges_.front()) return 0.0;
            if (x >= edges_.back()) return 1.0;
            const auto k =
                static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), x) - edges_.begin()) - 1;
            return cumulative_[k] + densities_[k] * (x - edges_[k]);
        }
    }
    return 0.0;
}

double BaseDensity::lower() const {
    switch (family_) {
        case DensityFamily::gamma: return 0.0;
        case DensityFamily::empirical: return edges_.front();
        default: return -kInf;
    }
}

double BaseDensity::upper() const {
    return family_ == DensityFamily::empirical ? edges_.back() : kInf;
}

std::pair<double, double> BaseDensity::integration_bounds() const {
    switch (family_) {
        case DensityFamily::gaussian:
            return {a_ - 10.0 * b_, a_ + 10.0 * b_};
        case DensityFamily::student: {
            // Heavy tails: +-10 leaves ~1e-4 of the mass outside for few degrees of freedom.
            const boost::math::students_t_distribution<> dist(a_);
            const double q = std::max(10.0, boost::math::quantile(boost::math::complement(dist, kTail)));
            return {-q, q};
        }
        case DensityFamily::gamma: {
            const boost::math::gamma_distribution<> dist(a_, 1.0 / b_);
            const double q = std::max(40.0 / b_, boost::math::quantile(boost::math::complement(dist, kTail)));
            return {0.0, q};
        }
        case DensityFamily::empirical:
            return {edges_.front(), edges_.back()};
    }
    return {0.0, 0.0};
}

double tn_density(const BaseDensity& base, double x) { return 2.0 * base.pdf(x) * (1.0 - base.cdf(x)); }

double fn_density(const BaseDensity& base, double x) { return 2.0 * base.cdf(x) * base.pdf(x); }

double integrate(const std::function<double(double)>& fn, double lo, double hi, int panels) {
    if (!(lo < hi)) throw std::invalid_argument("integrate: need lo < hi");
    if (panels < 2) throw std::invalid_argument("integrate: need at least 2 panels");
    if (panels % 2 != 0) ++panels;
    const double h = (hi - lo) / panels;
    double odd = 0.0;
    double even = 0.0;
    for (int k = 1; k < panels; ++k) {
        const double v = fn(lo + k * h);
        if (!std::isfinite(v)) throw std::domain_error("integrate: non-finite integrand sample");
        (k % 2 == 1 ? odd : even) += v;
    }
    const double a = fn(lo);
    const double b = fn(hi);
    if (!std::isfinite(a) || !std::isfinite(b)) throw std::domain_error("integrate: non-finite integrand sample");
    return h / 3.0 * (a + b + 4.0 * odd + 2.0 * even);
}

std::vector<double> cumulative_integral(const std::function<double(double)>& fn, std::span<const double> grid,
                                        int panels_per_step) {
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        out[k] = out[k - 1] + (grid[k] > grid[k - 1] ? integrate(fn, grid[k - 1], grid[k], panels_per_step) : 0.0);
    }
    return out;
}

std::vector<DensityRow> density_curves(const BaseDensity& base, std::span<const double> grid) {
    if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("density_curves: grid must be sorted");
    std::vector<DensityRow> rows;
    rows.reserve(grid.size());
    for (const double x : grid) {
        const double f = base.pdf(x);
        const double F = base.cdf(x);
        rows.push_back({x, f, 2.0 * f * (1.0 - F), 2.0 * F * f});
    }
    return rows;
}

std::vector<DensityPreset> density_presets() {
    return {
        {"gaussian", BaseDensity::gaussian(0.0, 1.0)},
        {"student", BaseDensity::student(5.0)},
        {"gamma", BaseDensity::gamma(2.0, 1.0)},
    };
}

DensityPreset density_preset(const std::string& family) {
    for (auto& preset : density_presets()) {
        if (preset.family == family) return preset;
    }
    throw std::invalid_argument("unknown density family '" + family + "' (expected gaussian, student or gamma)");
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k) out[k] = lo + step * static_cast<double>(k);
    if (count > 1) out.back() = hi;
    return out;
}

ScoreHistogramPair build_histogram_pair(int epoch, std::span<const double> tn_scores, std::span<const double> fn_scores,
                                        int bins) {
    if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
    ScoreHistogramPair out;
    out.epoch = epoch;
    out.tn_count = tn_scores.size();
    out.fn_count = fn_scores.size();
    out.tn_density.assign(static_cast<std::size_t>(bins), 0.0);
    out.fn_density.assign(static_cast<std::size_t>(bins), 0.0);

    double lo = kInf;
    double hi = -kInf;
    for (const auto scores : {tn_scores, fn_scores}) {
        for (const double s : scores) {
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    }
    if (lo > hi) {
        out.edges = linspace(0.0, 1.0, static_cast<std::size_t>(bins) + 1);
        return out;
    }
    if (lo == hi) {
        // Degenerate range: centre a unit-width span on the single value.
        lo -= 0.5;
        hi += 0.5;
    }
    out.edges = linspace(lo, hi, static_cast<std::size_t>(bins) + 1);
    const double width = (hi - lo) / bins;

    const auto fill = [&](std::span<const double> scores, std::vector<double>& density, double& mean) {
        if (scores.empty()) return;
        std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
        double sum = 0.0;
        for (const double s : scores) {
            auto k = static_cast<std::ptrdiff_t>((s - lo) / width);
            k = std::clamp<std::ptrdiff_t>(k, 0, bins - 1);
            ++counts[static_cast<std::size_t>(k)];
            sum += s;
        }
        const double n = static_cast<double>(scores.size());
        for (std::size_t k = 0; k < counts.size(); ++k) density[k] = static_cast<double>(counts[k]) / (n * width);
        mean = sum / n;
    };
    fill(tn_scores, out.tn_density, out.tn_mean);
    fill(fn_scores, out.fn_density, out.fn_mean);
    return out;
}

std::vector<SurfaceRow> unbias_surface(std::span<const double> grid_F, std::span<const double> grid_pfn) {
    std::vector<SurfaceRow> rows;
    rows.reserve(grid_F.size() * grid_pfn.size());
    for (const double F : grid_F) {
        for (const double p : grid_pfn) rows.push_back({F, p, unbias(F, p)});
    }
    return rows;
}

}  // namespace ppns
