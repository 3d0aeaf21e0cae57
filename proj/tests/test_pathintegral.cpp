#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "kappa/geometry.hpp"
#include "kappa/pathintegral.hpp"

using namespace kappa;
using namespace kappa::pathintegral;
using geometry::build_plane;
using geometry::DetectorLine;
using std::numbers::pi;

namespace {

PlaneLayout standard_plane(double baffle_len = 0.0) {
    return build_plane(0.10, 0.13, geometry::Combination::from_label("ABC"), baffle_len);
}

PropagationParams standard_params() { return {}; }

// endpoint (truncation) bound of the stationary-phase window integral
double truncation_bound(const PlaneLayout& layout, const PropagationParams& params,
                        double det_x) {
    const double k = params.wavenumber();
    const double X = params.window_half_extent(layout);
    const double z1 = layout.source_to_plane, z2 = layout.plane_to_detector;
    const double r1 = std::hypot(X, z1);
    const double r2m = std::hypot(X - det_x, z2), r2p = std::hypot(X + det_x, z2);
    const double g = 1.0 / std::sqrt(r1 * std::min(r2m, r2p));
    const double slope = k * (X / r1 + (X - std::abs(det_x)) / std::max(r2m, r2p));
    return std::sqrt(k / (2.0 * pi)) * 2.0 * g / slope;
}

} // namespace

TEST_CASE("free kernel forms") {
    const double lambda = 0.05;
    const double k = 2.0 * pi / lambda;
    const auto v = kernel({0.0, 0.0}, {0.0, lambda}, k);
    CHECK(std::abs(v) == doctest::Approx(1.0 / std::sqrt(lambda)).epsilon(1e-12));
    CHECK(std::arg(v) == doctest::Approx(0.0).epsilon(1e-9)); // full turn
    const auto h = kernel({0.0, 0.0}, {0.0, 0.5 * lambda}, k);
    CHECK(h.real() == doctest::Approx(-1.0 / std::sqrt(0.5 * lambda)).epsilon(1e-9));
    const auto w = kernel({0.0, 0.0}, {3.0, 4.0}, 1.0, KernelForm::three_d);
    CHECK(std::abs(w) == doctest::Approx(1.0 / 5.0).epsilon(1e-12));
    CHECK_THROWS_AS(kernel({1.0, 1.0}, {1.0, 1.0}, k), std::invalid_argument);
}

TEST_CASE("open window reproduces direct propagation") {
    PlaneLayout layout = standard_plane();
    layout.combination = geometry::Combination::empty();
    PropagationParams params = standard_params();

    const Point src{0.0, 0.0};
    const Point det{0.0, layout.source_to_plane + layout.plane_to_detector};
    const auto direct = kernel(src, det, params.wavenumber());

    const auto open25 = classical_amplitude(src, det, layout, params);
    const double bound25 = truncation_bound(layout, params, det.x);
    CHECK(std::abs(open25 - direct) <= 3.0 * bound25);
    CHECK(std::abs(open25 - direct) < 0.1 * std::abs(direct));

    // a much wider window must sit within its own, tighter bound
    PropagationParams wide = params;
    wide.integration_window = layout.outermost_slot_edge() + 100.0 * params.wavelength;
    const auto open100 = classical_amplitude(src, det, layout, wide);
    const double bound100 = truncation_bound(layout, wide, det.x);
    CHECK(bound100 < bound25);
    CHECK(std::abs(open100 - direct) <= 3.0 * bound100);
}

TEST_CASE("quadrature density is converged") {
    const PlaneLayout layout = standard_plane();
    PropagationParams coarse = standard_params();
    PropagationParams fine = coarse;
    fine.quadrature_points_per_wavelength = 64;

    const Point src{0.0, 0.0};
    const Point det{0.17, 2.5};
    for (const char* label : {"BG", "B", "CA", "ABC"}) {
        const PlaneLayout l =
            layout.with_combination(geometry::Combination::from_label(label));
        const auto a = classical_amplitude(src, det, l, coarse);
        const auto b = classical_amplitude(src, det, l, fine);
        CHECK(std::abs(a - b) <= 1e-8 * std::abs(b));
    }
}

TEST_CASE("classical bookkeeping cancels the three-slot deficit") {
    const PlaneLayout layout = standard_plane();
    const PropagationParams params = standard_params();
    const auto line = DetectorLine::symmetric(1.0, 41, layout.plane_to_detector);
    const KappaCurve curve = kappa_curve_pathintegral(layout, line, params, false);
    REQUIRE(curve.kappa.size() == 41);
    CHECK(curve.max_abs() <= 1e-13);
    CHECK(curve.normalization > 0.0);
    CHECK(curve.engine == "pathintegral");
}

TEST_CASE("hop terms produce a nonzero deficit") {
    const PlaneLayout layout = standard_plane();
    const PropagationParams params = standard_params();
    const auto line = DetectorLine::symmetric(0.6, 25, layout.plane_to_detector);
    const KappaCurve curve = kappa_curve_pathintegral(layout, line, params, true);
    CHECK(curve.max_abs() > 1e-6);
}

TEST_CASE("mirror symmetry of the breakdown") {
    const PlaneLayout layout = standard_plane();
    const PropagationParams params = standard_params();
    const Point src{0.0, 0.0};
    const auto right = amplitude_breakdown(src, {0.3, 2.5}, layout, params, true);
    const auto left = amplitude_breakdown(src, {-0.3, 2.5}, layout, params, true);
    const auto& combos = geometry::enumerate_combinations();
    for (int i = 0; i < 8; ++i) {
        const int j = geometry::combination_index(combos[static_cast<size_t>(i)].mirrored());
        const double pr = std::norm(right.total(i));
        const double pl = std::norm(left.total(j));
        CHECK(pr == doctest::Approx(pl).epsilon(1e-11));
    }
}

TEST_CASE("hop pairs add up and mirror") {
    const PlaneLayout layout =
        standard_plane().with_combination(geometry::Combination::from_label("ABC"));
    const PropagationParams base = standard_params();
    const Point src{0.0, 0.0};
    const Point det{0.0, 2.5};

    std::complex<double> sum = 0.0;
    for (int f = 0; f < 3; ++f)
        for (int t = 0; t < 3; ++t) {
            if (f == t) continue;
            PropagationParams p = base;
            p.hop_pairs = {{f, t}};
            sum += nonclassical_amplitude(src, det, layout, p);
        }
    const auto all = nonclassical_amplitude(src, det, layout, base);
    CHECK(std::abs(sum - all) <= 1e-12 * std::abs(all));

    PropagationParams ac = base;
    ac.hop_pairs = {{0, 2}};
    PropagationParams ca = base;
    ca.hop_pairs = {{2, 0}};
    const PlaneLayout outer =
        standard_plane().with_combination(geometry::Combination::from_label("CA"));
    const auto h_ac = nonclassical_amplitude(src, det, outer, ac);
    const auto h_ca = nonclassical_amplitude(src, det, outer, ca);
    CHECK(std::abs(h_ac - h_ca) <= 1e-10 * std::abs(h_ac));

    // pairs outside the combination contribute nothing
    PropagationParams ab = base;
    ab.hop_pairs = {{0, 1}};
    CHECK(std::abs(nonclassical_amplitude(src, det, outer, ab)) == 0.0);
}

TEST_CASE("breakdown assigns hops only to combinations holding both slots") {
    const PlaneLayout layout = standard_plane();
    const PropagationParams params = standard_params();
    const auto bd = amplitude_breakdown({0.0, 0.0}, {0.1, 2.5}, layout, params, true);
    CHECK(std::abs(bd.nonclassical[0]) == 0.0); // background
    for (int i = 1; i <= 3; ++i) CHECK(std::abs(bd.nonclassical[i]) == 0.0);
    for (int i = 4; i <= 7; ++i) CHECK(std::abs(bd.nonclassical[i]) > 0.0);

    const auto cl = amplitude_breakdown({0.0, 0.0}, {0.1, 2.5}, layout, params, false);
    for (int i = 0; i < 8; ++i) {
        CHECK(std::abs(cl.nonclassical[i]) == 0.0);
        CHECK(cl.classical[i] == bd.classical[i]);
    }
}

TEST_CASE("zero-length baffles change nothing") {
    const PropagationParams params = standard_params();
    const Point src{0.0, 0.0};
    const Point det{0.05, 2.5};
    PlaneLayout bare = standard_plane(0.0);
    bare.baffle_positions.clear();
    PlaneLayout with = standard_plane(0.0); // positions recorded, length zero
    const auto a = nonclassical_amplitude(src, det, bare, params);
    const auto b = nonclassical_amplitude(src, det, with, params);
    CHECK(a == b);
}

TEST_CASE("baffle reroute lengthens and attenuates hops") {
    const PropagationParams params = standard_params();
    const Point src{0.0, 0.0};
    const Point det{0.0, 2.5};
    const auto bare = std::abs(nonclassical_amplitude(src, det, standard_plane(), params));
    const auto l1 = std::abs(nonclassical_amplitude(src, det, standard_plane(0.05), params));
    const auto l2 = std::abs(nonclassical_amplitude(src, det, standard_plane(0.15), params));
    CHECK(l1 < bare);
    CHECK(l2 < l1);

    // blocking model kills every hop once baffles are present
    PropagationParams block = params;
    block.baffle_model = BaffleModel::block;
    CHECK(std::abs(nonclassical_amplitude(src, det, standard_plane(0.05), block)) == 0.0);
    // and an infinite baffle does the same under the reroute model
    const PlaneLayout walled = standard_plane(
        std::numeric_limits<double>::infinity());
    CHECK(std::abs(nonclassical_amplitude(src, det, walled, params)) == 0.0);
}

TEST_CASE("baffle sweep starts at the bare value and ends classical") {
    const PlaneLayout layout = standard_plane();
    const PropagationParams params = standard_params();
    const std::vector<double> lengths = {0.0, 0.05,
                                         std::numeric_limits<double>::infinity()};
    const auto sweep = baffle_sweep(layout, params, lengths);
    REQUIRE(sweep.size() == 3);

    DetectorLine center{{0.0}, layout.plane_to_detector};
    const auto bare = kappa_curve_pathintegral(layout, center, params, true);
    CHECK(sweep[0].second == doctest::Approx(std::abs(bare.kappa[0])).epsilon(1e-12));

    const auto classical = kappa_curve_pathintegral(layout, center, params, false);
    CHECK(sweep[2].second == doctest::Approx(std::abs(classical.kappa[0])).epsilon(1e-9));

    CHECK_THROWS_AS(baffle_sweep(layout, params, {0.1, 0.05}), std::invalid_argument);
    CHECK_THROWS_AS(baffle_sweep(layout, params, {}), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    const PlaneLayout layout = standard_plane();
    PropagationParams p = standard_params();
    p.effective_slot_width = 0.12; // wider than the physical bar
    CHECK_THROWS_AS(p.validate(layout), std::invalid_argument);
    p = standard_params();
    p.quadrature_points_per_wavelength = 4;
    CHECK_THROWS_AS(p.validate(layout), std::invalid_argument);
    p = standard_params();
    p.integration_window = 0.1; // inside the outermost slot edge
    CHECK_THROWS_AS(p.validate(layout), std::invalid_argument);
    p = standard_params();
    p.hop_pairs = {{0, 0}};
    CHECK_THROWS_AS(p.validate(layout), std::invalid_argument);
    p = standard_params();
    CHECK_NOTHROW(p.validate(layout));

    const std::string h1 = p.params_hash(layout);
    PropagationParams q = p;
    q.quadrature_points_per_wavelength = 24;
    CHECK(h1 == p.params_hash(layout));
    CHECK(h1 != q.params_hash(layout));
    CHECK(h1.size() == 16);
}

TEST_CASE("array factor phasor oracle") {
    const double k = 2.0 * pi;
    CHECK(std::abs(array_factor(3, 2.0, k, 0.0)) == doctest::Approx(3.0).epsilon(1e-12));
    // first null of the 3-element factor: d sin(theta) = lambda / 3
    const double theta0 = std::asin(1.0 / (3.0 * 2.0));
    CHECK(std::abs(array_factor(3, 2.0, k, theta0)) == doctest::Approx(0.0).epsilon(1e-12));

    for (double theta : {0.1, 0.37, 1.2}) {
        std::complex<double> ref = 0.0;
        for (int m = 0; m < 5; ++m)
            ref += std::exp(std::complex<double>(0.0, m * k * 1.3 * std::sin(theta)));
        const auto af = array_factor(5, 1.3, k, theta);
        CHECK(std::abs(af - ref) <= 1e-12 * std::abs(ref) + 1e-15);
    }
    CHECK_THROWS_AS(array_factor(0, 1.0, k, 0.0), std::invalid_argument);
}

TEST_CASE("coupled dipole subsets break pairwise additivity") {
    DipoleArrayParams params;
    const KappaCurve on = kappa_dipole_array(params);
    REQUIRE(on.kappa.size() == static_cast<size_t>(params.n_positions));
    CHECK(on.max_abs() > 1e-4);
    CHECK(on.engine == "array");

    DipoleArrayParams off = params;
    off.include_coupling = false;
    const KappaCurve base = kappa_dipole_array(off);
    CHECK(base.max_abs() <= 1e-13);
}

TEST_CASE("dipole array is reciprocal") {
    DipoleArrayParams fwd;
    DipoleArrayParams rev = fwd;
    rev.elements_as_receivers = true;
    const KappaCurve a = kappa_dipole_array(fwd);
    const KappaCurve b = kappa_dipole_array(rev);
    REQUIRE(a.kappa.size() == b.kappa.size());
    double worst = 0.0;
    for (size_t i = 0; i < a.kappa.size(); ++i)
        worst = std::max(worst, std::abs(a.kappa[i] - b.kappa[i]));
    CHECK(worst <= 1e-6);
}

TEST_CASE("thin wire coupling magnitude is small") {
    const double k = 2.0 * pi; // wavelength 1
    const auto g = thin_wire_coupling(k, 0.01);
    CHECK(std::abs(g) > 0.01);
    CHECK(std::abs(g) < 1.0);
    CHECK_THROWS_AS(thin_wire_coupling(k, 0.0), std::invalid_argument);
}

TEST_CASE("array parameter validation") {
    DipoleArrayParams p;
    p.observation_distance = 10.0; // too close for the subset comparison
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.n_elements = 2;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    CHECK_NOTHROW(p.validate());
    CHECK(p.params_hash().size() == 16);
}
