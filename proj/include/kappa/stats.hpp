#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kappa/geometry.hpp"
#include "kappa/sorkin.hpp"

namespace kappa::stats {

// ---------------------------------------------------------------------------
// Measurement runs
// ---------------------------------------------------------------------------

struct Reading {
    double timestamp_s = 0.0;
    double power_w = 0.0;
};

struct ReadingSeries {
    int index = 0;          // 0..14 in acquisition order
    std::string label;      // "BG0".."BG7" or a combination label
    bool background = false;
    std::vector<Reading> readings;

    std::vector<double> powers() const;
};

/// One acquisition at a fixed detector position: 8 background series
/// interleaved with 7 combination series, BG0, C1, BG1, C2, ..., C7, BG7.
/// The combination order C1..C7 may be any permutation of the 7 slot
/// combinations; labels record the actual order.
struct MeasurementRun {
    double position_m = 0.0;
    std::vector<ReadingSeries> series;

    /// Background series k (label BGk), k in [0, 7].
    const ReadingSeries& background_series(int k) const;
    /// The series measuring the given slot combination. Throws if absent.
    const ReadingSeries& combination_series(geometry::Combination c) const;
    /// Acquisition slot (1-based k in C_k) of the given combination.
    int combination_slot(geometry::Combination c) const;
};

/// Parses the raw-run CSV: header `position_m,<value>`, then rows
/// `series_index,label,reading_index,timestamp_s,power_w`. A literal
/// column-name line after the header is tolerated. Validates the 15-series
/// interleaving, strictly increasing timestamps, and non-negative powers.
MeasurementRun ingest_run(std::istream& in);
MeasurementRun ingest_run(const std::string& text);
MeasurementRun ingest_run_file(const std::string& path);

void write_run(std::ostream& out, const MeasurementRun& run);
void write_run_file(const std::string& path, const MeasurementRun& run);

// ---------------------------------------------------------------------------
// Robust summaries
// ---------------------------------------------------------------------------

/// Box summary with Tukey fences. Quartiles use linear interpolation between
/// order statistics: for n sorted values the q-quantile sits at rank
/// h = (n-1)q and interpolates x[floor(h)]..x[floor(h)+1]. Near outliers lie
/// strictly beyond 1.5*IQR from the quartiles, far outliers beyond 3*IQR;
/// every far outlier is also a near outlier.
struct BoxStats {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::vector<double> near_outliers;
    std::vector<double> far_outliers;

    double iqr() const { return q3 - q1; }
};

BoxStats summarize(std::vector<double> values);

/// Sample standard deviation (n-1 denominator; 0 for a single value).
double sample_std(const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Background referencing and per-run kappa
// ---------------------------------------------------------------------------

struct BackgroundRef {
    double value = 0.0; // mean of the adjacent before/after series medians
    double sigma = 0.0; // std over the two series' readings pooled
};

/// Before/after background for a combination: combination C_k is referenced
/// to the mean of the BG(k-1) and BG(k) medians; dispersion comes from the
/// pooled readings of both series.
BackgroundRef background_for(const MeasurementRun& run, geometry::Combination c);

struct RunKappa {
    double kappa = 0.0;
    double sigma_kappa = 0.0;      // gamma * error-budget total
    double background_median = 0.0; // median of the 8 background-series medians
    sorkin::NormalizedContributionSet contributions;
    sorkin::ErrorBudget budget;
};

/// Per-series medians as representative powers, before/after background
/// referencing, first-order error budget from the raw reading dispersions.
/// gamma rescales to the line's background peak when known (1 otherwise).
RunKappa kappa_from_run(const MeasurementRun& run, double gamma = 1.0);

// ---------------------------------------------------------------------------
// Repeats and convergence
// ---------------------------------------------------------------------------

struct KappaEstimate {
    double kappa_median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double sigma_kappa = 0.0; // per-run propagated error, carried through
    int n_runs = 0;
    BoxStats box;
};

KappaEstimate repeat_statistics(const std::vector<double>& kappas,
                                double per_run_sigma);

struct ConvergencePoint {
    int n = 0;
    double median_std = 0.0; // std of medians of random n-subsamples
};

/// Subsamples without repetition, `replications` draws per size, seeded.
/// n equal to the pool size leaves a single possible subsample (std 0).
std::vector<ConvergencePoint> convergence_check(const std::vector<double>& pool,
                                                const std::vector<int>& subsample_sizes,
                                                int replications,
                                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic acquisition
// ---------------------------------------------------------------------------

/// Noise model for synthesized runs: a slow sinusoidal source drift
/// multiplying every reading (largely cancelled by before/after
/// referencing), independent per-reading relative noise, and a per-series
/// placement jitter on the combination series (slot repositioning).
struct SynthesisParams {
    double position_m = 0.0;
    std::array<double, 8> true_powers{}; // canonical combination order, watts
    int readings_per_series = 3000;
    double series_duration_s = 45.0;
    double start_time_s = 0.0;
    double drift_relative = 0.003;
    double drift_period_s = 600.0;
    double reading_noise_relative = 3e-4;
    double placement_jitter_relative = 7e-4;
    bool randomize_combination_order = false;
};

MeasurementRun synthesize_run(const SynthesisParams& params, std::uint64_t seed);

} // namespace kappa::stats
