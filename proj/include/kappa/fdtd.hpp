#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kappa/curve.hpp"
#include "kappa/geometry.hpp"

namespace kappa::fdtd {

// ---------------------------------------------------------------------------
// Materials
// ---------------------------------------------------------------------------

enum class MaterialKind : std::uint8_t { vacuum = 0, absorber = 1, metal = 2 };

/// Axis-aligned material rectangle. Metal is treated as a perfect conductor.
struct MaterialRegion {
    geometry::Interval x; // meters
    geometry::Interval y; // meters, along the propagation axis
    double eps_r = 1.0;
    double mu_r = 1.0;
    double sigma = 0.0; // electric conductivity, S/m
    MaterialKind kind = MaterialKind::vacuum;

    void validate() const; // eps_r >= 1, mu_r >= 1, sigma >= 0, non-empty extent
};

/// Absorber/metal/absorber sandwich realizing one slot bar. The default
/// conductivity gives a one-pass attenuation of about 21 dB through one
/// absorber layer at 6 GHz (>= the 20 dB design target).
struct LaminateSpec {
    double absorber_thickness = 2.2e-3;
    double metal_thickness = 3.0e-3;
    double eps_r = 11.107;
    double mu_r = 1.912;
    double sigma = 30.0;

    double total_thickness() const {
        return metal_thickness + 2.0 * absorber_thickness;
    }
};

// ---------------------------------------------------------------------------
// Simulation parameters
// ---------------------------------------------------------------------------

/// 2D TM grid: the electric field points out of the simulation plane
/// (vertical polarization), x runs along the slot plane and y along the
/// propagation axis. Zero cell size resolves to wavelength/20; zero time
/// step resolves to courant_fraction of the stability bound, rounded so a
/// period is an integer number of steps (exact-period demodulation).
struct SimulationParams {
    double frequency = 6.0e9; // Hz
    double cell_size = 0.0;   // m, 0 -> wavelength/20
    double time_step = 0.0;   // s, 0 -> resolved from courant_fraction
    double box_x = 2.0;       // m along the slot plane
    double box_y = 2.5;       // m along propagation
    int pml_cells = 10;
    int run_periods = 80;
    int demod_periods = 8; // phasor extraction window at the end of the run
    int ramp_periods = 5;  // smooth source turn-on
    double courant_fraction = 0.99;
    double convergence_threshold = 2e-3; // relative cycle-to-cycle change
    double source_margin = 0.25; // m, source above the lower interior edge
    LaminateSpec laminate;

    double wavelength() const;
    double resolved_cell() const;
    double courant_bound() const; // dt_max = cell / (c * sqrt(2))
    int steps_per_period() const;
    double resolved_step() const;
    /// >= 20 cells per wavelength, stable time step, positive extents,
    /// enough run time to cover the demodulation window.
    void validate() const;
    std::string params_hash(const geometry::PlaneLayout& layout) const;
};

struct SourceSpec {
    double x = 0.0; // meters
    double y = 0.0;
    double amplitude = 1.0; // arbitrary field units
};

struct Probe {
    double x = 0.0; // meters
    double y = 0.0;
};

// ---------------------------------------------------------------------------
// Grid state
// ---------------------------------------------------------------------------

/// Yee grid with split-field PML on all four sides. The out-of-plane E
/// lives on integer nodes, H components on half-integer edges. Material
/// conductivity damps both split E halves equally, which reproduces the
/// physical lossy update for the summed field.
struct Grid {
    SimulationParams params; // with cell_size/time_step resolved
    int nx = 0, ny = 0;      // E nodes
    double dx = 0.0, dt = 0.0;
    int steps_per_period = 0;
    double x0 = 0.0, y0 = 0.0; // coordinates of node (0, 0)
    int pml = 0;
    double plane_y = 0.0;    // slot-plane coordinate
    double detector_y = 0.0; // detector-line coordinate
    SourceSpec source;       // registered default source
    long step_index = 0;

    std::vector<double> ez, ezx, ezy; // ez = ezx + ezy, kept in sync
    std::vector<double> hx, hy;       // hx: nx*(ny-1), hy: (nx-1)*ny
    std::vector<double> caex, cbex, caey, cbey; // E update coefficients
    std::vector<double> dahx, dbhx, dahy, dbhy; // H update coefficients
    std::vector<std::uint8_t> kind;             // MaterialKind per E node
    std::vector<float> eps_r_node, mu_r_node;   // for the energy monitor

    size_t node(int i, int j) const {
        return static_cast<size_t>(j) * static_cast<size_t>(nx) +
               static_cast<size_t>(i);
    }
    double x_at(int i) const { return x0 + i * dx; }
    double y_at(int j) const { return y0 + j * dx; }
    int x_index(double x) const;
    int y_index(double y) const;
    bool interior(int i, int j) const; // inside the non-PML region

    /// One leapfrog update (H half-step, then E, then the soft source).
    void step();
    /// Sum of eps*E^2/2 + mu*H^2/2 over the grid, times the cell area.
    double total_energy() const;
};

/// Rasterizes the layout's bars as laminate stacks on the slot plane.
/// Layer thicknesses snap up to at least one cell; bars of non-positive
/// width paint nothing (an all-vacuum scene). Throws if the layout carries
/// baffles (not representable here), if a bar leaves the interior, or if
/// the cell is coarser than twice the thinnest laminate layer.
Grid build_grid(const SimulationParams& params, const geometry::PlaneLayout& layout);

/// Raw-region variant for bare test scenes. Regions snap to at least one
/// node row/column each.
Grid build_grid(const SimulationParams& params,
                const std::vector<MaterialRegion>& regions,
                double source_to_plane, double plane_to_detector);

// ---------------------------------------------------------------------------
// Time stepping and phasor extraction
// ---------------------------------------------------------------------------

/// Phasors from two-quadrature demodulation over the final demod_periods.
struct FieldSample {
    std::complex<double> e;  // out-of-plane E
    std::complex<double> h;  // in-plane H component along the slot plane
    double poynting = 0.0;   // |time-averaged Poynting vector|, arbitrary units
};

struct SteadyStateResult {
    std::vector<FieldSample> samples; // one per probe
    /// Tail supremum of the relative cycle-to-cycle amplitude change at the
    /// probe farthest from the source, one entry per trailing period;
    /// non-increasing by construction.
    std::vector<double> residual_history;
    /// Largest cycle-to-cycle change inside the demodulation window.
    double residual = 0.0;
    int periods_run = 0;
    std::vector<double> energy_history; // total field energy, once per period
    double peak_energy = 0.0;
    double final_energy = 0.0;
};

/// Drives the grid to its steady state with a continuous sinusoid and
/// extracts complex phasors at the probes. Throws if the run is too short
/// for the farthest probe or if the residual stays above the threshold.
SteadyStateResult run_to_steady_state(Grid& grid, const SourceSpec& source,
                                      const std::vector<Probe>& probes);

/// Runs one simulation per slot combination and assembles the interference
/// deficit from the Poynting magnitudes, normalized by the largest
/// background power on the line.
KappaCurve kappa_curve_fdtd(const SimulationParams& params,
                            const geometry::PlaneLayout& layout,
                            const geometry::DetectorLine& line);

// ---------------------------------------------------------------------------
// Dumps for visualization
// ---------------------------------------------------------------------------

/// CSV of non-vacuum nodes: i,j,x_m,y_m,kind.
void write_material_map(std::ostream& out, const Grid& grid);

/// Text header "ez-raster nx ny dx step" then nx*ny little-endian float32
/// values of the instantaneous out-of-plane field, row-major from y0.
void write_field_snapshot(std::ostream& out, const Grid& grid);

} // namespace kappa::fdtd
