#include "kappa/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "kappa/sorkin.hpp"
#include "kappa/util.hpp"

namespace kappa::fdtd {

using geometry::PlaneLayout;

namespace {

constexpr double c0 = 299792458.0;
constexpr double eps0 = 8.8541878128e-12;
constexpr double mu0 = 1.25663706212e-6;
constexpr double eta0 = 376.730313668;

// node-sampled material properties gathered before coefficient assembly
struct MaterialMap {
    std::vector<double> eps, mu, sig;
    std::vector<std::uint8_t> kind;

    explicit MaterialMap(size_t n)
        : eps(n, 1.0), mu(n, 1.0), sig(n, 0.0), kind(n, 0) {}
};

// graded PML conductivity at a (possibly half-integer) node position
double pml_sigma(double pos, int count, int pml, double sigma_max) {
    const double lo_face = pml + 1.0;
    const double hi_face = count - 2.0 - pml;
    double xi = 0.0;
    if (pos < lo_face)
        xi = (lo_face - pos) / pml;
    else if (pos > hi_face)
        xi = (pos - hi_face) / pml;
    if (xi <= 0.0) return 0.0;
    if (xi > 1.0) xi = 1.0;
    return sigma_max * xi * xi * xi * xi;
}

Grid base_grid(const SimulationParams& params, double d1, double d2) {
    params.validate();
    if (!(d1 > 0.0) || !(d2 > 0.0))
        throw std::invalid_argument("plane distances must be positive");

    Grid g;
    g.params = params;
    g.dx = params.resolved_cell();
    g.dt = params.resolved_step();
    g.steps_per_period = params.steps_per_period();
    g.pml = params.pml_cells;

    const long half_ix = std::lround(0.5 * params.box_x / g.dx);
    const long ny_int = std::lround(params.box_y / g.dx);
    const int cx = static_cast<int>(half_ix) + g.pml + 1;
    g.nx = 2 * cx + 1;
    g.ny = static_cast<int>(ny_int) + 1 + 2 * (g.pml + 1);
    g.x0 = -cx * g.dx;
    g.y0 = -(g.pml + 1) * g.dx;

    g.source = {0.0, params.source_margin, 1.0};
    g.plane_y = params.source_margin + d1;
    g.detector_y = g.plane_y + d2;
    if (g.detector_y + params.wavelength() > params.box_y + 1e-12)
        throw std::invalid_argument(
            "box too short along propagation for the requested distances");
    return g;
}

void finalize(Grid& g, const MaterialMap& m) {
    const size_t nn = static_cast<size_t>(g.nx) * static_cast<size_t>(g.ny);
    const size_t nhx = static_cast<size_t>(g.nx) * static_cast<size_t>(g.ny - 1);
    const size_t nhy = static_cast<size_t>(g.nx - 1) * static_cast<size_t>(g.ny);
    g.ez.assign(nn, 0.0);
    g.ezx.assign(nn, 0.0);
    g.ezy.assign(nn, 0.0);
    g.hx.assign(nhx, 0.0);
    g.hy.assign(nhy, 0.0);
    g.caex.assign(nn, 0.0);
    g.cbex.assign(nn, 0.0);
    g.caey.assign(nn, 0.0);
    g.cbey.assign(nn, 0.0);
    g.dahx.assign(nhx, 0.0);
    g.dbhx.assign(nhx, 0.0);
    g.dahy.assign(nhy, 0.0);
    g.dbhy.assign(nhy, 0.0);
    g.kind = m.kind;
    g.eps_r_node.assign(nn, 1.0f);
    g.mu_r_node.assign(nn, 1.0f);
    for (size_t n = 0; n < nn; ++n) {
        g.eps_r_node[n] = static_cast<float>(m.eps[n]);
        g.mu_r_node[n] = static_cast<float>(m.mu[n]);
    }

    // reflection target 1e-8, quartic grading
    const double sigma_max =
        -5.0 * std::log(1e-8) / (2.0 * eta0 * (g.pml * g.dx));

    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const size_t n = g.node(i, j);
            const bool edge = i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1;
            if (edge || m.kind[n] == static_cast<std::uint8_t>(MaterialKind::metal))
                continue; // coefficients stay zero: the field is pinned at 0
            const double sx = pml_sigma(i, g.nx, g.pml, sigma_max) + m.sig[n];
            const double sy = pml_sigma(j, g.ny, g.pml, sigma_max) + m.sig[n];
            const double epsn = eps0 * m.eps[n];
            const double ax = sx * g.dt / (2.0 * epsn);
            const double ay = sy * g.dt / (2.0 * epsn);
            g.caex[n] = (1.0 - ax) / (1.0 + ax);
            g.cbex[n] = g.dt / (epsn * g.dx) / (1.0 + ax);
            g.caey[n] = (1.0 - ay) / (1.0 + ay);
            g.cbey[n] = g.dt / (epsn * g.dx) / (1.0 + ay);
        }
    }
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const size_t n = g.node(i, j);
            const double mur = 0.5 * (m.mu[n] + m.mu[n + g.nx]);
            const double s = pml_sigma(j + 0.5, g.ny, g.pml, sigma_max);
            const double b = s * g.dt / (2.0 * eps0 * mur);
            g.dahx[n] = (1.0 - b) / (1.0 + b);
            g.dbhx[n] = g.dt / (mu0 * mur * g.dx) / (1.0 + b);
        }
    }
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const size_t n = g.node(i, j);
            const size_t nh = static_cast<size_t>(j) * (g.nx - 1) + i;
            const double mur = 0.5 * (m.mu[n] + m.mu[n + 1]);
            const double s = pml_sigma(i + 0.5, g.nx, g.pml, sigma_max);
            const double b = s * g.dt / (2.0 * eps0 * mur);
            g.dahy[nh] = (1.0 - b) / (1.0 + b);
            g.dbhy[nh] = g.dt / (mu0 * mur * g.dx) / (1.0 + b);
        }
    }
}

void paint_rows(MaterialMap& m, const Grid& g, int i_lo, int i_hi, int j_lo,
                int j_hi, double eps, double mu, double sig, MaterialKind kind) {
    for (int j = j_lo; j <= j_hi; ++j) {
        for (int i = i_lo; i <= i_hi; ++i) {
            const size_t n = g.node(i, j);
            m.eps[n] = eps;
            m.mu[n] = mu;
            m.sig[n] = sig;
            m.kind[n] = static_cast<std::uint8_t>(kind);
        }
    }
}

MaterialMap paint_layout(const Grid& g, const PlaneLayout& layout) {
    if (layout.baffle_length > 0.0)
        throw std::invalid_argument("baffles are not representable in the grid solver");
    const LaminateSpec& lam = g.params.laminate;
    if (g.dx > 2.0 * std::min(lam.absorber_thickness, lam.metal_thickness))
        throw std::invalid_argument("cell too coarse for the slot laminate");

    MaterialMap m(static_cast<size_t>(g.nx) * static_cast<size_t>(g.ny));
    const int n_abs =
        static_cast<int>(std::max<long>(1, std::lround(lam.absorber_thickness / g.dx)));
    const int n_met =
        static_cast<int>(std::max<long>(1, std::lround(lam.metal_thickness / g.dx)));
    const int total = 2 * n_abs + n_met;
    const int j_lo = g.y_index(g.plane_y) - total / 2;
    const int j_hi = j_lo + total - 1;

    const int j_src = g.y_index(g.params.source_margin);
    const int j_det = g.y_index(g.detector_y);
    if ((j_src >= j_lo && j_src <= j_hi) || (j_det >= j_lo && j_det <= j_hi))
        throw std::invalid_argument("slot plane overlaps the source or detector");

    const double lambda = g.params.wavelength();
    const int clear = static_cast<int>(std::ceil(2.0 * lambda / g.dx));
    for (const geometry::Interval& bar : layout.absorber_intervals()) {
        if (bar.width() <= 0.0) continue;
        const int i_lo =
            static_cast<int>(std::ceil((bar.lo - g.x0) / g.dx - 1e-9));
        const int i_hi =
            static_cast<int>(std::floor((bar.hi - g.x0) / g.dx + 1e-9));
        if (i_lo < g.pml + 1 + clear || i_hi > g.nx - 2 - g.pml - clear)
            throw std::invalid_argument("slot bars too close to the boundary layer");
        paint_rows(m, g, i_lo, i_hi, j_lo, j_lo + n_abs - 1, lam.eps_r, lam.mu_r,
                   lam.sigma, MaterialKind::absorber);
        paint_rows(m, g, i_lo, i_hi, j_lo + n_abs, j_lo + n_abs + n_met - 1, 1.0,
                   1.0, 0.0, MaterialKind::metal);
        paint_rows(m, g, i_lo, i_hi, j_lo + n_abs + n_met, j_hi, lam.eps_r,
                   lam.mu_r, lam.sigma, MaterialKind::absorber);
    }
    return m;
}

MaterialMap paint_regions(const Grid& g, const std::vector<MaterialRegion>& regions) {
    MaterialMap m(static_cast<size_t>(g.nx) * static_cast<size_t>(g.ny));
    for (const MaterialRegion& r : regions) {
        r.validate();
        int i_lo = static_cast<int>(std::ceil((r.x.lo - g.x0) / g.dx - 1e-9));
        int i_hi = static_cast<int>(std::floor((r.x.hi - g.x0) / g.dx + 1e-9));
        if (i_lo > i_hi) i_lo = i_hi = g.x_index(r.x.center());
        int j_lo = static_cast<int>(std::ceil((r.y.lo - g.y0) / g.dx - 1e-9));
        int j_hi = static_cast<int>(std::floor((r.y.hi - g.y0) / g.dx + 1e-9));
        if (j_lo > j_hi) j_lo = j_hi = g.y_index(r.y.center());
        i_lo = std::max(i_lo, 0);
        i_hi = std::min(i_hi, g.nx - 1);
        j_lo = std::max(j_lo, 0);
        j_hi = std::min(j_hi, g.ny - 1);
        if (i_lo > i_hi || j_lo > j_hi)
            throw std::invalid_argument("material region outside the grid");
        paint_rows(m, g, i_lo, i_hi, j_lo, j_hi, r.eps_r, r.mu_r, r.sigma, r.kind);
    }
    return m;
}

} // namespace

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

void MaterialRegion::validate() const {
    if (x.hi < x.lo || y.hi < y.lo)
        throw std::invalid_argument("material region extent is inverted");
    if (eps_r < 1.0 - 1e-12 || mu_r < 1.0 - 1e-12)
        throw std::invalid_argument("relative permittivity and permeability must be >= 1");
    if (sigma < 0.0) throw std::invalid_argument("conductivity must be non-negative");
}

double SimulationParams::wavelength() const { return c0 / frequency; }

double SimulationParams::resolved_cell() const {
    return cell_size > 0.0 ? cell_size : wavelength() / 20.0;
}

double SimulationParams::courant_bound() const {
    return resolved_cell() / (c0 * std::sqrt(2.0));
}

int SimulationParams::steps_per_period() const {
    const double period = 1.0 / frequency;
    const double target =
        time_step > 0.0 ? time_step : courant_fraction * courant_bound();
    const int m = static_cast<int>(std::ceil(period / target - 1e-9));
    return std::max(m, 4);
}

double SimulationParams::resolved_step() const {
    return (1.0 / frequency) / steps_per_period();
}

void SimulationParams::validate() const {
    if (!(frequency > 0.0)) throw std::invalid_argument("frequency must be positive");
    if (!(box_x > 0.0) || !(box_y > 0.0))
        throw std::invalid_argument("box extents must be positive");
    if (pml_cells < 4) throw std::invalid_argument("need at least 4 boundary cells");
    if (demod_periods < 1) throw std::invalid_argument("need a demodulation window");
    if (ramp_periods < 0) throw std::invalid_argument("negative ramp");
    if (run_periods < ramp_periods + demod_periods + 2)
        throw std::invalid_argument("run too short for ramp plus demodulation");
    if (!(courant_fraction > 0.0) || courant_fraction > 1.0)
        throw std::invalid_argument("courant fraction must lie in (0, 1]");
    const double cell = resolved_cell();
    if (!(cell > 0.0)) throw std::invalid_argument("cell size must be positive");
    if (wavelength() / cell < 20.0 * (1.0 - 1e-9))
        throw std::invalid_argument("need at least 20 cells per wavelength");
    if (time_step > 0.0 && time_step > courant_bound() * (1.0 + 1e-12))
        throw std::invalid_argument("time step exceeds the stability bound");
    if (source_margin < wavelength())
        throw std::invalid_argument("source must clear the boundary layer");
    if (!(convergence_threshold > 0.0))
        throw std::invalid_argument("convergence threshold must be positive");
    if (!(laminate.absorber_thickness > 0.0) || !(laminate.metal_thickness > 0.0))
        throw std::invalid_argument("laminate layers must have positive thickness");
    if (laminate.eps_r < 1.0 || laminate.mu_r < 1.0 || laminate.sigma < 0.0)
        throw std::invalid_argument("invalid laminate material constants");
}

std::string SimulationParams::params_hash(const PlaneLayout& layout) const {
    std::ostringstream s;
    s << "fdtd;f=" << fmt_g(frequency) << ";dx=" << fmt_g(resolved_cell())
      << ";dt=" << fmt_g(resolved_step()) << ";bx=" << fmt_g(box_x)
      << ";by=" << fmt_g(box_y) << ";pml=" << pml_cells << ";rp=" << run_periods
      << ";dp=" << demod_periods << ";ramp=" << ramp_periods
      << ";thr=" << fmt_g(convergence_threshold) << ";sm=" << fmt_g(source_margin)
      << ";lam=" << fmt_g(laminate.absorber_thickness) << ","
      << fmt_g(laminate.metal_thickness) << "," << fmt_g(laminate.eps_r) << ","
      << fmt_g(laminate.mu_r) << "," << fmt_g(laminate.sigma)
      << ";w=" << fmt_g(layout.slot_width);
    for (double c : layout.slot_centers) s << "," << fmt_g(c);
    s << ";z1=" << fmt_g(layout.source_to_plane)
      << ";z2=" << fmt_g(layout.plane_to_detector);
    return fnv1a_hex(s.str());
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

int Grid::x_index(double x) const {
    return static_cast<int>(std::lround((x - x0) / dx));
}

int Grid::y_index(double y) const {
    return static_cast<int>(std::lround((y - y0) / dx));
}

bool Grid::interior(int i, int j) const {
    return i >= pml + 1 && i <= nx - 2 - pml && j >= pml + 1 && j <= ny - 2 - pml;
}

void Grid::step() {
    const int w = nx;
    // H advances to (step_index + 1/2) dt
    for (int j = 0; j + 1 < ny; ++j) {
        const size_t row = node(0, j);
        for (int i = 0; i < w; ++i) {
            const size_t n = row + i;
            hx[n] = dahx[n] * hx[n] - dbhx[n] * (ez[n + w] - ez[n]);
        }
    }
    for (int j = 0; j < ny; ++j) {
        const size_t erow = node(0, j);
        const size_t hrow = static_cast<size_t>(j) * (w - 1);
        for (int i = 0; i + 1 < w; ++i) {
            const size_t n = hrow + i;
            hy[n] = dahy[n] * hy[n] + dbhy[n] * (ez[erow + i + 1] - ez[erow + i]);
        }
    }
    // E advances to (step_index + 1) dt
    for (int j = 1; j + 1 < ny; ++j) {
        const size_t erow = node(0, j);
        const size_t hrow = static_cast<size_t>(j) * (w - 1);
        for (int i = 1; i + 1 < w; ++i) {
            const size_t n = erow + i;
            const double ex = caex[n] * ezx[n] + cbex[n] * (hy[hrow + i] - hy[hrow + i - 1]);
            const double ey = caey[n] * ezy[n] - cbey[n] * (hx[n] - hx[n - w]);
            ezx[n] = ex;
            ezy[n] = ey;
            ez[n] = ex + ey;
        }
    }
    ++step_index;

    const double period = 1.0 / params.frequency;
    const double t = step_index * dt;
    double envelope = 1.0;
    if (params.ramp_periods > 0) {
        const double arg = t / (params.ramp_periods * period);
        if (arg < 1.0) {
            const double sr = std::sin(0.5 * std::numbers::pi * arg);
            envelope = sr * sr;
        }
    }
    const size_t n_src = node(x_index(source.x), y_index(source.y));
    ezx[n_src] += source.amplitude * envelope *
                  std::sin(2.0 * std::numbers::pi * params.frequency * t);
    ez[n_src] = ezx[n_src] + ezy[n_src];
}

double Grid::total_energy() const {
    double e_sum = 0.0;
    const size_t nn = ez.size();
    for (size_t n = 0; n < nn; ++n)
        e_sum += 0.5 * eps0 * eps_r_node[n] * ez[n] * ez[n];
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const size_t n = node(i, j);
            const double mur = 0.5 * (mu_r_node[n] + mu_r_node[n + nx]);
            e_sum += 0.5 * mu0 * mur * hx[n] * hx[n];
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const size_t n = node(i, j);
            const size_t nh = static_cast<size_t>(j) * (nx - 1) + i;
            const double mur = 0.5 * (mu_r_node[n] + mu_r_node[n + 1]);
            e_sum += 0.5 * mu0 * mur * hy[nh] * hy[nh];
        }
    }
    return e_sum * dx * dx;
}

Grid build_grid(const SimulationParams& params, const PlaneLayout& layout) {
    Grid g = base_grid(params, layout.source_to_plane, layout.plane_to_detector);
    finalize(g, paint_layout(g, layout));
    return g;
}

Grid build_grid(const SimulationParams& params,
                const std::vector<MaterialRegion>& regions,
                double source_to_plane, double plane_to_detector) {
    Grid g = base_grid(params, source_to_plane, plane_to_detector);
    finalize(g, paint_regions(g, regions));
    return g;
}

// ---------------------------------------------------------------------------
// Steady state
// ---------------------------------------------------------------------------

SteadyStateResult run_to_steady_state(Grid& g, const SourceSpec& source,
                                      const std::vector<Probe>& probes) {
    if (probes.empty()) throw std::invalid_argument("no probes given");
    const int i_src = g.x_index(source.x);
    const int j_src = g.y_index(source.y);
    if (!g.interior(i_src, j_src))
        throw std::invalid_argument("source outside the interior region");
    if (g.kind[g.node(i_src, j_src)] == static_cast<std::uint8_t>(MaterialKind::metal))
        throw std::invalid_argument("source inside a conductor");
    g.source = source;

    struct ProbeNode {
        int i = 0, j = 0;
        size_t n = 0;
        double dist = 0.0;
    };
    std::vector<ProbeNode> nodes;
    size_t watch = 0; // probe farthest from the source
    for (const Probe& p : probes) {
        ProbeNode pn;
        pn.i = g.x_index(p.x);
        pn.j = g.y_index(p.y);
        if (!g.interior(pn.i, pn.j))
            throw std::invalid_argument("probe outside the interior region");
        pn.n = g.node(pn.i, pn.j);
        pn.dist = std::hypot(g.x_at(pn.i) - source.x, g.y_at(pn.j) - source.y);
        nodes.push_back(pn);
        if (pn.dist > nodes[watch].dist) watch = nodes.size() - 1;
    }

    const double lambda = g.params.wavelength();
    const int needed = static_cast<int>(std::ceil(nodes[watch].dist / lambda)) +
                       g.params.ramp_periods + g.params.demod_periods + 2;
    if (g.params.run_periods < needed)
        throw std::invalid_argument("run too short to settle at the farthest probe");

    const int m = g.steps_per_period;
    const long total = static_cast<long>(g.params.run_periods) * m;
    const long demod_start = total - static_cast<long>(g.params.demod_periods) * m;
    const double omega = 2.0 * std::numbers::pi * g.params.frequency;

    const size_t np = nodes.size();
    std::vector<double> ce(np, 0.0), se(np, 0.0), chx(np, 0.0), shx(np, 0.0),
        chy(np, 0.0), shy(np, 0.0);
    double pce = 0.0, pse = 0.0;
    std::vector<std::complex<double>> period_amps;
    SteadyStateResult out;

    while (g.step_index < total) {
        g.step();
        const long k = g.step_index;
        const double te = k * g.dt;
        const double th = (k - 0.5) * g.dt;
        const double wez = g.ez[nodes[watch].n];
        pce += wez * std::cos(omega * te);
        pse += wez * std::sin(omega * te);
        if (k % m == 0) {
            period_amps.emplace_back(2.0 * pce / m, -2.0 * pse / m);
            pce = pse = 0.0;
            out.energy_history.push_back(g.total_energy());
        }
        if (k > demod_start) {
            const double cte = std::cos(omega * te), ste = std::sin(omega * te);
            const double cth = std::cos(omega * th), sth = std::sin(omega * th);
            for (size_t p = 0; p < np; ++p) {
                const ProbeNode& pn = nodes[p];
                const double v = g.ez[pn.n];
                ce[p] += v * cte;
                se[p] += v * ste;
                const double hxa = 0.5 * (g.hx[pn.n] + g.hx[pn.n - g.nx]);
                chx[p] += hxa * cth;
                shx[p] += hxa * sth;
                const size_t hyrow = static_cast<size_t>(pn.j) * (g.nx - 1);
                const double hya =
                    0.5 * (g.hy[hyrow + pn.i] + g.hy[hyrow + pn.i - 1]);
                chy[p] += hya * cth;
                shy[p] += hya * sth;
            }
        }
    }

    const double nd = static_cast<double>(total - demod_start);
    out.samples.resize(np);
    for (size_t p = 0; p < np; ++p) {
        const std::complex<double> e(2.0 * ce[p] / nd, -2.0 * se[p] / nd);
        const std::complex<double> hxp(2.0 * chx[p] / nd, -2.0 * shx[p] / nd);
        const std::complex<double> hyp(2.0 * chy[p] / nd, -2.0 * shy[p] / nd);
        const double s_x = -0.5 * std::real(e * std::conj(hyp));
        const double s_y = 0.5 * std::real(e * std::conj(hxp));
        out.samples[p] = {e, hxp, std::hypot(s_x, s_y)};
    }

    // relative cycle-to-cycle change of the watched amplitude, as a
    // non-increasing tail supremum
    double amp_max = 0.0;
    for (const auto& a : period_amps) amp_max = std::max(amp_max, std::abs(a));
    std::vector<double> raw;
    for (size_t k = 1; k < period_amps.size(); ++k) {
        const double denom = std::max(
            {std::abs(period_amps[k]), std::abs(period_amps[k - 1]), 1e-12 * amp_max});
        raw.push_back(denom > 0.0
                          ? std::abs(period_amps[k] - period_amps[k - 1]) / denom
                          : 0.0);
    }
    out.residual_history.resize(raw.size());
    double tail = 0.0;
    for (size_t k = raw.size(); k-- > 0;) {
        tail = std::max(tail, raw[k]);
        out.residual_history[k] = tail;
    }
    const size_t window = std::min<size_t>(g.params.demod_periods, raw.size());
    out.residual = raw.empty() ? 0.0 : out.residual_history[raw.size() - window];
    out.periods_run = g.params.run_periods;
    out.peak_energy = out.energy_history.empty()
                          ? 0.0
                          : *std::max_element(out.energy_history.begin(),
                                              out.energy_history.end());
    out.final_energy = out.energy_history.empty() ? 0.0 : out.energy_history.back();
    if (out.residual > g.params.convergence_threshold)
        throw std::runtime_error("steady state not reached: residual " +
                                 fmt_g(out.residual) + " after " +
                                 std::to_string(g.params.run_periods) + " periods");
    return out;
}

KappaCurve kappa_curve_fdtd(const SimulationParams& params,
                            const PlaneLayout& layout,
                            const geometry::DetectorLine& line) {
    if (line.positions.empty()) throw std::invalid_argument("empty detector line");
    const auto& combos = geometry::enumerate_combinations();
    const size_t npos = line.positions.size();
    std::array<std::vector<double>, 8> powers;

    for (size_t ci = 0; ci < combos.size(); ++ci) {
        Grid grid = build_grid(params, layout.with_combination(combos[ci]));
        std::vector<Probe> probes;
        probes.reserve(npos);
        for (double x : line.positions) probes.push_back({x, grid.detector_y});
        SteadyStateResult res = run_to_steady_state(grid, grid.source, probes);
        powers[ci].reserve(npos);
        for (const FieldSample& s : res.samples) powers[ci].push_back(s.poynting);
    }

    const double max_bg = *std::max_element(powers[0].begin(), powers[0].end());
    if (!(max_bg > 0.0)) throw std::runtime_error("no background power on the line");

    KappaCurve curve;
    curve.engine = "fdtd";
    curve.params_hash = params.params_hash(layout);
    curve.normalization = max_bg;
    curve.positions_m = line.positions;
    curve.angles_deg = line.angles_deg();
    curve.kappa.reserve(npos);
    for (size_t p = 0; p < npos; ++p) {
        sorkin::PowerSet ps;
        for (size_t ci = 0; ci < 8; ++ci) ps.p[ci] = powers[ci][p];
        ps.max_background = max_bg;
        curve.kappa.push_back(sorkin::kappa_pointwise(ps));
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Dumps
// ---------------------------------------------------------------------------

void write_material_map(std::ostream& out, const Grid& grid) {
    out << "i,j,x_m,y_m,kind\n";
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const auto k = grid.kind[grid.node(i, j)];
            if (k == static_cast<std::uint8_t>(MaterialKind::vacuum)) continue;
            out << i << ',' << j << ',' << fmt_g(grid.x_at(i)) << ','
                << fmt_g(grid.y_at(j)) << ','
                << (k == static_cast<std::uint8_t>(MaterialKind::metal) ? "metal"
                                                                        : "absorber")
                << "\n";
        }
    }
}

void write_field_snapshot(std::ostream& out, const Grid& grid) {
    out << "ez-raster " << grid.nx << ' ' << grid.ny << ' ' << fmt_g(grid.dx, 17)
        << ' ' << grid.step_index << "\n";
    std::vector<float> row(static_cast<size_t>(grid.nx));
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i)
            row[static_cast<size_t>(i)] = static_cast<float>(grid.ez[grid.node(i, j)]);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
}

} // namespace kappa::fdtd
