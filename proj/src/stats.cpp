#include "kappa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kappa/util.hpp"

namespace kappa::stats {

using geometry::Combination;

// ---------------------------------------------------------------------------
// Series and run accessors
// ---------------------------------------------------------------------------

std::vector<double> ReadingSeries::powers() const {
    std::vector<double> out;
    out.reserve(readings.size());
    for (const Reading& r : readings) out.push_back(r.power_w);
    return out;
}

const ReadingSeries& MeasurementRun::background_series(int k) const {
    if (k < 0 || k > 7) throw std::invalid_argument("background index out of range");
    const auto idx = static_cast<size_t>(2 * k);
    if (idx >= series.size()) throw std::invalid_argument("run has too few series");
    return series[idx];
}

int MeasurementRun::combination_slot(Combination c) const {
    for (size_t s = 1; s < series.size(); s += 2)
        if (Combination::from_label(series[s].label) == c)
            return static_cast<int>((s + 1) / 2);
    throw std::invalid_argument("combination " + c.label() + " not present in run");
}

const ReadingSeries& MeasurementRun::combination_series(Combination c) const {
    const int k = combination_slot(c);
    return series[static_cast<size_t>(2 * k - 1)];
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const char* what) {
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("bad ") + what + ": " + s);
    }
    if (used != s.size())
        throw std::invalid_argument(std::string("bad ") + what + ": " + s);
    return v;
}

int parse_int(const std::string& s, const char* what) {
    size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("bad ") + what + ": " + s);
    }
    if (used != s.size())
        throw std::invalid_argument(std::string("bad ") + what + ": " + s);
    return v;
}

void validate_label(int series_index, const std::string& label) {
    if (series_index % 2 == 0) {
        const std::string want = "BG" + std::to_string(series_index / 2);
        if (label != want)
            throw std::invalid_argument("series " + std::to_string(series_index) +
                                        " must be labeled " + want + ", got " + label);
    } else {
        const Combination c = Combination::from_label(label); // throws if unknown
        if (c == Combination::empty())
            throw std::invalid_argument("combination series cannot be labeled BG");
        if (c.label() != label)
            throw std::invalid_argument("non-canonical combination label: " + label);
    }
}

} // namespace

MeasurementRun ingest_run(std::istream& in) {
    MeasurementRun run;
    std::string line;

    if (!std::getline(in, line)) throw std::invalid_argument("empty run file");
    {
        const auto head = split_csv(line);
        if (head.size() != 2 || head[0] != "position_m")
            throw std::invalid_argument("run file must start with position_m,<value>");
        run.position_m = parse_double(head[1], "position");
    }

    double last_timestamp = -std::numeric_limits<double>::infinity();
    bool saw_column_line = false;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (!saw_column_line && line.rfind("series_index,", 0) == 0) {
            saw_column_line = true; // optional literal column-name line
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 5)
            throw std::invalid_argument("run row needs 5 fields: " + line);
        const int sidx = parse_int(f[0], "series index");
        if (sidx < 0 || sidx > 14)
            throw std::invalid_argument("series index out of range: " + f[0]);

        if (run.series.empty() || sidx != run.series.back().index) {
            const int expect = run.series.empty() ? 0 : run.series.back().index + 1;
            if (sidx != expect)
                throw std::invalid_argument("series " + std::to_string(expect) +
                                            " missing or out of order");
            validate_label(sidx, f[1]);
            ReadingSeries s;
            s.index = sidx;
            s.label = f[1];
            s.background = sidx % 2 == 0;
            run.series.push_back(std::move(s));
        } else if (run.series.back().label != f[1]) {
            throw std::invalid_argument("label changes inside series " + f[0]);
        }

        ReadingSeries& cur = run.series.back();
        const int ridx = parse_int(f[2], "reading index");
        if (ridx != static_cast<int>(cur.readings.size()))
            throw std::invalid_argument("reading index out of order in series " + f[0]);
        Reading r;
        r.timestamp_s = parse_double(f[3], "timestamp");
        if (!(r.timestamp_s > last_timestamp))
            throw std::invalid_argument("timestamps must be strictly increasing");
        last_timestamp = r.timestamp_s;
        r.power_w = parse_double(f[4], "power");
        if (r.power_w < 0.0) throw std::invalid_argument("negative power reading");
        cur.readings.push_back(r);
    }

    if (run.series.size() != 15)
        throw std::invalid_argument("run must hold 15 series, got " +
                                    std::to_string(run.series.size()));
    for (const ReadingSeries& s : run.series)
        if (s.readings.empty())
            throw std::invalid_argument("series " + std::to_string(s.index) + " is empty");

    // every slot combination measured at most once
    for (size_t a = 1; a < run.series.size(); a += 2)
        for (size_t b = a + 2; b < run.series.size(); b += 2)
            if (run.series[a].label == run.series[b].label)
                throw std::invalid_argument("combination " + run.series[a].label +
                                            " measured twice");
    return run;
}

MeasurementRun ingest_run(const std::string& text) {
    std::istringstream in(text);
    return ingest_run(in);
}

MeasurementRun ingest_run_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open run file: " + path);
    return ingest_run(in);
}

void write_run(std::ostream& out, const MeasurementRun& run) {
    out << "position_m," << fmt_g(run.position_m, 17) << "\n";
    out << "series_index,label,reading_index,timestamp_s,power_w\n";
    for (const ReadingSeries& s : run.series) {
        for (size_t i = 0; i < s.readings.size(); ++i) {
            out << s.index << ',' << s.label << ',' << i << ','
                << fmt_g(s.readings[i].timestamp_s, 17) << ','
                << fmt_g(s.readings[i].power_w, 17) << "\n";
        }
    }
}

void write_run_file(const std::string& path, const MeasurementRun& run) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write run file: " + path);
    write_run(out, run);
}

// ---------------------------------------------------------------------------
// Robust summaries
// ---------------------------------------------------------------------------

namespace {

// linear interpolation between order statistics at rank (n-1)q
double quantile_sorted(const std::vector<double>& x, double q) {
    const double h = (static_cast<double>(x.size()) - 1.0) * q;
    const auto lo = static_cast<size_t>(h);
    if (lo + 1 >= x.size()) return x.back();
    return x[lo] + (h - static_cast<double>(lo)) * (x[lo + 1] - x[lo]);
}

} // namespace

BoxStats summarize(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("empty sample");
    std::sort(values.begin(), values.end());
    BoxStats bs;
    bs.q1 = quantile_sorted(values, 0.25);
    bs.median = quantile_sorted(values, 0.50);
    bs.q3 = quantile_sorted(values, 0.75);
    const double iqr = bs.q3 - bs.q1;
    const double near_lo = bs.q1 - 1.5 * iqr, near_hi = bs.q3 + 1.5 * iqr;
    const double far_lo = bs.q1 - 3.0 * iqr, far_hi = bs.q3 + 3.0 * iqr;
    for (double v : values) {
        if (v < near_lo || v > near_hi) bs.near_outliers.push_back(v);
        if (v < far_lo || v > far_hi) bs.far_outliers.push_back(v);
    }
    return bs;
}

double sample_std(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("empty sample");
    if (values.size() == 1) return 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (static_cast<double>(values.size()) - 1.0));
}

// ---------------------------------------------------------------------------
// Background referencing and per-run kappa
// ---------------------------------------------------------------------------

BackgroundRef background_for(const MeasurementRun& run, Combination c) {
    const int k = run.combination_slot(c);
    const ReadingSeries& before = run.background_series(k - 1);
    const ReadingSeries& after = run.background_series(k);
    const auto pb = before.powers();
    const auto pa = after.powers();
    BackgroundRef ref;
    ref.value = 0.5 * (summarize(pb).median + summarize(pa).median);
    std::vector<double> pooled = pb;
    pooled.insert(pooled.end(), pa.begin(), pa.end());
    ref.sigma = sample_std(pooled);
    return ref;
}

RunKappa kappa_from_run(const MeasurementRun& run, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    RunKappa out;

    std::vector<double> bg_medians;
    for (int k = 0; k <= 7; ++k)
        bg_medians.push_back(summarize(run.background_series(k).powers()).median);
    out.background_median = summarize(bg_medians).median;

    std::array<double, 7> powers{}, refs{};
    std::array<sorkin::PowerReading, 7> power_readings{}, ref_readings{};
    const auto& combos = geometry::enumerate_combinations();
    for (int i = 0; i < 7; ++i) {
        const Combination c = combos[static_cast<size_t>(i) + 1];
        const auto p = run.combination_series(c).powers();
        const BoxStats box = summarize(p);
        const BackgroundRef ref = background_for(run, c);
        if (!(ref.value > 0.0))
            throw std::invalid_argument("zero background median for " + c.label());
        const auto si = static_cast<size_t>(i);
        powers[si] = box.median;
        refs[si] = ref.value;
        power_readings[si] = {box.median, sample_std(p)};
        ref_readings[si] = {ref.value, ref.sigma};
    }

    out.contributions = sorkin::make_contributions(powers, refs, gamma);
    out.kappa = sorkin::kappa_background_referenced(out.contributions);
    out.budget = sorkin::propagate_errors(power_readings, ref_readings);
    out.sigma_kappa = gamma * out.budget.sigma_kappa;
    return out;
}

// ---------------------------------------------------------------------------
// Repeats and convergence
// ---------------------------------------------------------------------------

KappaEstimate repeat_statistics(const std::vector<double>& kappas,
                                double per_run_sigma) {
    if (kappas.empty()) throw std::invalid_argument("no kappa values");
    if (per_run_sigma < 0.0) throw std::invalid_argument("negative sigma");
    KappaEstimate est;
    est.box = summarize(kappas);
    est.kappa_median = est.box.median;
    est.q1 = est.box.q1;
    est.q3 = est.box.q3;
    est.sigma_kappa = per_run_sigma;
    est.n_runs = static_cast<int>(kappas.size());
    return est;
}

std::vector<ConvergencePoint> convergence_check(const std::vector<double>& pool,
                                                const std::vector<int>& subsample_sizes,
                                                int replications,
                                                std::uint64_t seed) {
    if (pool.empty()) throw std::invalid_argument("empty pool");
    if (replications < 2) throw std::invalid_argument("need at least 2 replications");
    for (int n : subsample_sizes)
        if (n < 1 || n > static_cast<int>(pool.size()))
            throw std::invalid_argument("subsample size exceeds pool");

    std::mt19937_64 rng(seed);
    std::vector<ConvergencePoint> out;
    std::vector<size_t> idx(pool.size());
    for (int n : subsample_sizes) {
        std::vector<double> medians;
        medians.reserve(static_cast<size_t>(replications));
        for (int r = 0; r < replications; ++r) {
            // partial Fisher-Yates: first n entries become the subsample
            for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::vector<double> sub(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j) {
                std::uniform_int_distribution<size_t> pick(static_cast<size_t>(j),
                                                           idx.size() - 1);
                std::swap(idx[static_cast<size_t>(j)], idx[pick(rng)]);
                sub[static_cast<size_t>(j)] = pool[idx[static_cast<size_t>(j)]];
            }
            medians.push_back(summarize(sub).median);
        }
        out.push_back({n, sample_std(medians)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic acquisition
// ---------------------------------------------------------------------------

MeasurementRun synthesize_run(const SynthesisParams& params, std::uint64_t seed) {
    if (params.readings_per_series < 1)
        throw std::invalid_argument("need at least one reading per series");
    if (!(params.series_duration_s > 0.0) || !(params.drift_period_s > 0.0))
        throw std::invalid_argument("durations must be positive");
    if (params.drift_relative < 0.0 || params.reading_noise_relative < 0.0 ||
        params.placement_jitter_relative < 0.0)
        throw std::invalid_argument("noise magnitudes must be non-negative");
    for (double p : params.true_powers)
        if (p < 0.0 || !std::isfinite(p))
            throw std::invalid_argument("true powers must be finite and non-negative");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> uphase(0.0, 2.0 * std::numbers::pi);
    const double phase = uphase(rng);

    std::array<int, 7> order{1, 2, 3, 4, 5, 6, 7};
    if (params.randomize_combination_order)
        std::shuffle(order.begin(), order.end(), rng);

    const auto& combos = geometry::enumerate_combinations();
    MeasurementRun run;
    run.position_m = params.position_m;
    const int n = params.readings_per_series;
    const double dt = params.series_duration_s / n;
    for (int s = 0; s < 15; ++s) {
        ReadingSeries series;
        series.index = s;
        series.background = s % 2 == 0;
        double base = 0.0;
        if (series.background) {
            series.label = "BG" + std::to_string(s / 2);
            base = params.true_powers[0];
        } else {
            const int ci = order[static_cast<size_t>((s - 1) / 2)];
            series.label = combos[static_cast<size_t>(ci)].label();
            base = params.true_powers[static_cast<size_t>(ci)];
            base *= 1.0 + params.placement_jitter_relative * gauss(rng);
        }
        series.readings.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double t = params.start_time_s + s * params.series_duration_s +
                             (i + 0.5) * dt;
            const double drift =
                1.0 + params.drift_relative *
                          std::sin(2.0 * std::numbers::pi * t / params.drift_period_s +
                                   phase);
            double value = base * drift *
                           (1.0 + params.reading_noise_relative * gauss(rng));
            if (value < 0.0) value = 0.0;
            series.readings.push_back({t, value});
        }
        run.series.push_back(std::move(series));
    }
    return run;
}

} // namespace kappa::stats
