#include "kappa/sorkin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kappa::sorkin {

// ---------------------------------------------------------------------------
// Pointwise kappa
// ---------------------------------------------------------------------------

// canonical order: BG, A, B, C, AB, BC, CA, ABC
namespace {
constexpr int iBG = 0, iA = 1, iB = 2, iC = 3, iAB = 4, iBC = 5, iCA = 6, iABC = 7;
}

double kappa_pointwise(const PowerSet& ps) {
    if (!(ps.max_background > 0.0))
        throw std::invalid_argument("kappa normalization must be positive");
    const auto& p = ps.p;
    const double inner =
        p[iABC] - p[iAB] - p[iBC] - p[iCA] + p[iA] + p[iB] + p[iC];
    return (p[iBG] - inner) / ps.max_background;
}

NormalizedContributionSet make_contributions(const std::array<double, 7>& powers,
                                             const std::array<double, 7>& backgrounds,
                                             double gamma) {
    NormalizedContributionSet ncs;
    ncs.gamma = gamma;
    ncs.background = backgrounds;
    for (size_t i = 0; i < 7; ++i) {
        if (!(backgrounds[i] > 0.0))
            throw std::invalid_argument("combination background must be positive");
        ncs.P[i] = (backgrounds[i] - powers[i]) / backgrounds[i];
    }
    return ncs;
}

double kappa_background_referenced(const NormalizedContributionSet& ncs) {
    // P order: A, B, C, AB, BC, CA, ABC
    const auto& P = ncs.P;
    return ncs.gamma * (P[6] - P[3] - P[4] - P[5] + P[0] + P[1] + P[2]);
}

// ---------------------------------------------------------------------------
// Seven-region identity
// ---------------------------------------------------------------------------

namespace {

std::complex<double> kept_sum(const std::array<std::complex<double>, 7>& regions,
                              unsigned combo_bits) {
    // bars for A, B, C occupy regions 2, 4, 6 (array indices 1, 3, 5)
    std::complex<double> sum = 0.0;
    for (size_t r = 0; r < 7; ++r) {
        const bool bar_region = (r % 2 == 1);
        if (bar_region && (combo_bits & (1u << (r / 2)))) continue;
        sum += regions[r];
    }
    return sum;
}

double region_power(const std::array<std::complex<double>, 7>& e,
                    const std::array<std::complex<double>, 7>& h,
                    unsigned combo_bits) {
    return std::real(kept_sum(e, combo_bits) * std::conj(kept_sum(h, combo_bits)));
}

} // namespace

double slot_identity_residual(const std::array<std::complex<double>, 7>& e,
                              const std::array<std::complex<double>, 7>& h) {
    const double p_bg = region_power(e, h, 0u);
    const double p_a = region_power(e, h, 1u), p_b = region_power(e, h, 2u);
    const double p_c = region_power(e, h, 4u);
    const double p_ab = region_power(e, h, 3u), p_bc = region_power(e, h, 6u);
    const double p_ca = region_power(e, h, 5u);
    const double p_abc = region_power(e, h, 7u);
    return p_bg - (p_a + p_b + p_c - p_ab - p_bc - p_ca + p_abc);
}

double slot_identity_residual(const std::array<std::complex<double>, 7>& e) {
    return slot_identity_residual(e, e);
}

double slot_identity_scale(const std::array<std::complex<double>, 7>& e,
                           const std::array<std::complex<double>, 7>& h) {
    double scale = 0.0;
    for (unsigned bits : {0u, 1u, 2u, 4u, 3u, 6u, 5u, 7u})
        scale += std::abs(region_power(e, h, bits));
    return scale;
}

// ---------------------------------------------------------------------------
// Error propagation
// ---------------------------------------------------------------------------

double propagate_single(const PowerReading& power, const PowerReading& background) {
    if (!(background.value > 0.0))
        throw std::invalid_argument("background power must be positive");
    const double t1 = power.value / (background.value * background.value) * background.sigma;
    const double t2 = power.sigma / background.value;
    return std::sqrt(t1 * t1 + t2 * t2);
}

ErrorBudget propagate_errors(const std::array<PowerReading, 7>& combination_powers,
                             const std::array<PowerReading, 7>& backgrounds) {
    ErrorBudget out;
    double sum_sq = 0.0;
    for (size_t i = 0; i < 7; ++i) {
        out.delta_P[i] = propagate_single(combination_powers[i], backgrounds[i]);
        sum_sq += out.delta_P[i] * out.delta_P[i];
    }
    out.sigma_kappa = std::sqrt(sum_sq);
    return out;
}

// ---------------------------------------------------------------------------
// Nonlinearity model
// ---------------------------------------------------------------------------

namespace {

void check_calibration(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("calibration columns differ in length");
    if (x.size() < 4)
        throw std::invalid_argument("calibration needs at least 4 points");
    for (size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1]))
            throw std::invalid_argument("calibration inputs must be strictly increasing");
        if (!(y[i] > y[i - 1]))
            throw std::invalid_argument("calibration readings must be strictly increasing");
    }
}

// Natural cubic spline second derivatives via the Thomas algorithm.
std::vector<double> spline_second_derivatives(const std::vector<double>& x,
                                              const std::vector<double>& y) {
    const size_t n = x.size();
    std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), d(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        a[i] = h0 / 6.0;
        b[i] = (h0 + h1) / 3.0;
        c[i] = h1 / 6.0;
        d[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    }
    for (size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    std::vector<double> m(n);
    m[n - 1] = d[n - 1] / b[n - 1];
    for (size_t i = n - 1; i-- > 0;)
        m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
    return m;
}

double spline_derivative(const std::vector<double>& x, const std::vector<double>& y,
                         const std::vector<double>& m, size_t i, double t) {
    const double h = x[i + 1] - x[i];
    const double A = (x[i + 1] - t) / h, B = (t - x[i]) / h;
    return (y[i + 1] - y[i]) / h -
           (3.0 * A * A - 1.0) * h / 6.0 * m[i] +
           (3.0 * B * B - 1.0) * h / 6.0 * m[i + 1];
}

// Solves the small dense normal-equation system by Gaussian elimination.
std::vector<double> solve_dense(std::vector<std::vector<double>> A,
                                std::vector<double> rhs) {
    const size_t n = rhs.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        std::swap(rhs[col], rhs[piv]);
        if (A[col][col] == 0.0)
            throw std::invalid_argument("degenerate calibration fit");
        for (size_t r = col + 1; r < n; ++r) {
            const double w = A[r][col] / A[col][col];
            for (size_t k = col; k < n; ++k) A[r][k] -= w * A[col][k];
            rhs[r] -= w * rhs[col];
        }
    }
    std::vector<double> sol(n);
    for (size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (size_t k = i + 1; k < n; ++k) s -= A[i][k] * sol[k];
        sol[i] = s / A[i][i];
    }
    return sol;
}

double eval_poly(const std::vector<double>& coeff, double x) {
    double v = 0.0;
    for (size_t i = coeff.size(); i-- > 0;) v = v * x + coeff[i];
    return v;
}

} // namespace

NonlinearityModel NonlinearityModel::fit(const std::vector<double>& input_w,
                                         const std::vector<double>& measured_w,
                                         FitKind kind, int degree) {
    check_calibration(input_w, measured_w);

    NonlinearityModel model;
    model.kind_ = kind;
    model.range_lo_ = input_w.front();
    model.range_hi_ = input_w.back();

    if (kind == FitKind::spline) {
        model.x_ = input_w;
        model.y_ = measured_w;
        model.m_ = spline_second_derivatives(input_w, measured_w);
        // the interpolant must stay increasing between the knots
        for (size_t i = 0; i + 1 < model.x_.size(); ++i) {
            double lo = spline_derivative(model.x_, model.y_, model.m_, i, model.x_[i]);
            double hi = spline_derivative(model.x_, model.y_, model.m_, i, model.x_[i + 1]);
            double min_d = std::min(lo, hi);
            const double mi = model.m_[i], mj = model.m_[i + 1];
            if (mi != mj) {
                // extremum of the quadratic derivative inside the interval
                const double t = (mi * model.x_[i + 1] - mj * model.x_[i]) / (mi - mj);
                if (t > model.x_[i] && t < model.x_[i + 1])
                    min_d = std::min(min_d,
                                     spline_derivative(model.x_, model.y_, model.m_, i, t));
            }
            const double scale = (measured_w.back() - measured_w.front()) /
                                 (input_w.back() - input_w.front());
            if (min_d < -1e-12 * scale)
                throw std::invalid_argument("fitted calibration map is not monotone");
        }
        return model;
    }

    const size_t n = input_w.size();
    if (degree < 1 || static_cast<size_t>(degree) >= n)
        throw std::invalid_argument("polynomial degree must be in [1, npoints-1]");

    // fit in a [-1,1]-scaled basis, then unscale the coefficients
    const double alpha = 2.0 / (input_w.back() - input_w.front());
    const double beta = -(input_w.back() + input_w.front()) /
                        (input_w.back() - input_w.front());
    const size_t k = static_cast<size_t>(degree) + 1;
    std::vector<std::vector<double>> A(k, std::vector<double>(k, 0.0));
    std::vector<double> rhs(k, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const double t = alpha * input_w[i] + beta;
        std::vector<double> pow_t(2 * k - 1, 1.0);
        for (size_t j = 1; j < pow_t.size(); ++j) pow_t[j] = pow_t[j - 1] * t;
        for (size_t r = 0; r < k; ++r) {
            for (size_t c = 0; c < k; ++c) A[r][c] += pow_t[r + c];
            rhs[r] += pow_t[r] * measured_w[i];
        }
    }
    const std::vector<double> ct = solve_dense(std::move(A), std::move(rhs));

    // expand ct in powers of (alpha*x + beta)
    std::vector<double> unscaled(k, 0.0);
    std::vector<double> base{1.0}; // (alpha*x + beta)^j
    for (size_t j = 0; j < k; ++j) {
        for (size_t c = 0; c < base.size(); ++c) unscaled[c] += ct[j] * base[c];
        if (j + 1 < k) {
            std::vector<double> next(base.size() + 1, 0.0);
            for (size_t c = 0; c < base.size(); ++c) {
                next[c] += base[c] * beta;
                next[c + 1] += base[c] * alpha;
            }
            base = std::move(next);
        }
    }
    model.poly_ = std::move(unscaled);

    // monotonicity over the calibration range, checked on a dense grid
    const double scale = (measured_w.back() - measured_w.front()) /
                         (input_w.back() - input_w.front());
    double prev = model(input_w.front());
    const int ngrid = 2048;
    for (int i = 1; i <= ngrid; ++i) {
        const double x = model.range_lo_ +
                         (model.range_hi_ - model.range_lo_) * i / ngrid;
        const double v = model(x);
        if (v < prev - 1e-9 * scale * (model.range_hi_ - model.range_lo_))
            throw std::invalid_argument("fitted calibration map is not monotone");
        prev = v;
    }
    return model;
}

double NonlinearityModel::operator()(double x) const {
    if (kind_ == FitKind::polynomial) return eval_poly(poly_, x);

    const auto& xs = x_;
    if (x <= xs.front()) {
        const double d = spline_derivative(x_, y_, m_, 0, xs.front());
        return y_.front() + d * (x - xs.front());
    }
    if (x >= xs.back()) {
        const size_t i = xs.size() - 2;
        const double d = spline_derivative(x_, y_, m_, i, xs.back());
        return y_.back() + d * (x - xs.back());
    }
    const size_t i = static_cast<size_t>(
        std::upper_bound(xs.begin(), xs.end(), x) - xs.begin() - 1);
    const double h = xs[i + 1] - xs[i];
    const double A = (xs[i + 1] - x) / h, B = (x - xs[i]) / h;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double NonlinearityModel::invert(double y) const {
    double lo = range_lo_, hi = range_hi_;
    double step = std::max(hi - lo, 1e-300);
    for (int tries = 0; (*this)(lo) > y; ++tries) {
        if (tries == 64)
            throw std::invalid_argument("value below the invertible range");
        lo -= step;
        step *= 2.0;
    }
    step = std::max(range_hi_ - range_lo_, 1e-300);
    for (int tries = 0; (*this)(hi) < y; ++tries) {
        if (tries == 64)
            throw std::invalid_argument("value above the invertible range");
        hi += step;
        step *= 2.0;
    }
    for (int it = 0; it < 200 && lo < hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // bracket at one ulp
        ((*this)(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

NonlinearityModel fit_nonlinearity(const std::vector<double>& input_w,
                                   const std::vector<double>& measured_w,
                                   FitKind kind, int degree) {
    return NonlinearityModel::fit(input_w, measured_w, kind, degree);
}

// ---------------------------------------------------------------------------
// Error-model kappa
// ---------------------------------------------------------------------------

ErrorKappaResult error_kappa(const NonlinearityModel& model,
                             const std::vector<double>& positions_m,
                             const std::vector<PowerSet>& ideal,
                             double plane_to_detector_m) {
    if (positions_m.size() != ideal.size())
        throw std::invalid_argument("positions and power sets differ in length");
    if (ideal.empty())
        throw std::invalid_argument("error_kappa needs at least one position");

    ErrorKappaResult out;
    std::vector<PowerSet> distorted(ideal.size());
    double max_bg = 0.0;
    for (size_t i = 0; i < ideal.size(); ++i) {
        for (size_t c = 0; c < 8; ++c) {
            if (!model.in_range(ideal[i].p[c])) ++out.extrapolated;
            distorted[i].p[c] = model(ideal[i].p[c]);
        }
        max_bg = std::max(max_bg, distorted[i].p[iBG]);
    }

    out.curve.engine = "error-model";
    out.curve.normalization = max_bg;
    out.curve.positions_m = positions_m;
    geometry::DetectorLine line{positions_m, plane_to_detector_m};
    out.curve.angles_deg = line.angles_deg();
    out.curve.kappa.reserve(ideal.size());
    for (auto& ps : distorted) {
        ps.max_background = max_bg;
        out.curve.kappa.push_back(kappa_pointwise(ps));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Units
// ---------------------------------------------------------------------------

double watts_from_dbm(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double dbm_from_watts(double watts) {
    if (!(watts > 0.0)) throw std::invalid_argument("power must be positive in dBm");
    return 10.0 * std::log10(watts) + 30.0;
}

} // namespace kappa::sorkin
