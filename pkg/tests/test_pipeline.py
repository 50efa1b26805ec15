"""Observable assembly: broadening, band integrals, angular scans."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr

from helpers import drive_for
from qcompton.emission import TruncationNotConverged, coherent_peaks
from qcompton.minkowski import (EmissionGeometry, KinematicallyForbidden,
                                electron_momentum, photon_wavevector)
from qcompton.photon_statistics import (bsv_stats, coherent_stats,
                                        thermal_stats)
from qcompton.pipeline import (AngularCurve, GaussianPeak, OmegaGrid,
                               Scenario, SpectralCurve,
                               _gaussian_convolve_linear,
                               angular_distribution, band_integrate,
                               energy_spectrum)
from qcompton.units import pulse_duration

AT_REST = electron_momentum(1.0, (0.0, 0.0, 1.0))
HEAD_ON = electron_momentum(7.09, (0.0, 0.0, -1.0))
BACK = EmissionGeometry(theta=math.radians(159.9))


def _scenario(intensity, maker, grid, electron=AT_REST, **kw):
    drive = drive_for(intensity)
    return Scenario(electron=electron, drive=drive,
                    stats=maker(drive.omega, drive.rho),
                    omega_grid=grid, **kw)


# ------------------------------------------------------------- validation

def test_grid_and_scenario_validation():
    with pytest.raises(ValueError):
        OmegaGrid(0.0, 1.0, 10)
    with pytest.raises(ValueError):
        OmegaGrid(2.0, 1.0, 10)
    with pytest.raises(ValueError):
        OmegaGrid(1.0, 2.0, 1)
    with pytest.raises(ValueError):
        OmegaGrid(1.0, 2.0, 10, spacing="cubic")
    assert OmegaGrid(1.0, 2.0, 5, spacing="log").points()[0] == 1.0

    drive = drive_for(9e15)
    good = thermal_stats(drive.omega, drive.rho)
    with pytest.raises(ValueError):
        Scenario(electron=AT_REST, drive=drive, stats=good,
                 omega_grid=OmegaGrid(1.0, 2.0, 8), broadening="boxcar")
    with pytest.raises(ValueError):
        Scenario(electron=AT_REST, drive=drive,
                 stats=thermal_stats(1.9, drive.rho),
                 omega_grid=OmegaGrid(1.0, 2.0, 8))
    with pytest.raises(ValueError):
        Scenario(electron=AT_REST, drive=drive, stats=good,
                 omega_grid=OmegaGrid(1.0, 2.0, 8), thetas=(4.0,))


def test_spectral_curve_validation():
    x = np.linspace(1.0, 2.0, 5)
    with pytest.raises(ValueError):
        SpectralCurve(omega=x[::-1].copy(), smooth=np.zeros(5))
    with pytest.raises(ValueError):
        SpectralCurve(omega=x, smooth=-np.ones(5))
    with pytest.raises(ValueError):
        SpectralCurve(omega=x, smooth=np.zeros(4))


def test_spectrum_rejects_grid_beyond_ceiling():
    sc = _scenario(9e15, thermal_stats, OmegaGrid(1.0, 3.0e5, 50))
    with pytest.raises(KinematicallyForbidden):
        energy_spectrum(sc, BACK)


# ------------------------------------------------------ exact convolution

def test_convolution_matches_quadrature_and_conserves():
    # hat-shaped piecewise-linear density against brute-force quadrature
    x_nodes = np.array([0.0, 1.0, 1.5, 3.0, 4.0, 6.0])
    y_nodes = np.array([0.0, 2.0, 0.5, 0.5, 3.0, 0.0])
    sigma = 0.3
    x_eval = np.linspace(-3.0, 9.0, 1201)
    got = _gaussian_convolve_linear(x_nodes, y_nodes, sigma, x_eval)

    def pl(t):
        return float(np.interp(t, x_nodes, y_nodes, left=0.0, right=0.0))

    for xe in (0.0, 0.7, 1.5, 2.9, 4.05, 5.5, 6.8):
        want, _ = quad(lambda t, xe=xe: pl(t) * math.exp(
            -0.5 * ((xe - t) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi)),
            x_nodes[0], x_nodes[-1], epsabs=1e-14, epsrel=1e-12, limit=200)
        idx = int(np.searchsorted(x_eval, xe))
        assert got[idx] == pytest.approx(want, rel=1e-10, abs=1e-13)

    # convolution against a unit-mass kernel conserves the integral
    mass_in = float(np.trapezoid(y_nodes, x_nodes))
    mass_out, _ = quad(
        lambda xx: float(_gaussian_convolve_linear(
            x_nodes, y_nodes, sigma, np.array([xx]))[0]),
        -3.0, 9.0, epsabs=1e-13, epsrel=1e-12, limit=400)
    assert mass_out == pytest.approx(mass_in, rel=1e-9)


# ------------------------------------------------------- coherent spectra

def test_coherent_spectrum_lines_carry_duration_times_weight():
    grid = OmegaGrid(0.5, 12.0, 600)
    sc = _scenario(9e16, coherent_stats, grid)
    curve = energy_spectrum(sc, BACK)
    assert np.all(curve.smooth == 0.0)
    assert len(curve.peaks) >= 5
    t_pulse = pulse_duration(sc.drive.delta_omega).per_eV
    raw = {q.order: q for q in coherent_peaks(
        sc.stats, AT_REST.p, sc.wavevector(), BACK, range(1, 2000))}
    by_center = {pk.center: pk for pk in curve.peaks}
    for order, q in raw.items():
        if q.omega_prime in by_center:
            pk = by_center[q.omega_prime]
            assert pk.mass == pytest.approx(t_pulse * q.weight, rel=1e-12)
            assert pk.sigma == sc.drive.delta_omega   # literal reading
    assert curve.metadata["state"] == "coherent"
    assert curve.metadata["broadening"] == "literal"
    assert curve.metadata["theta_deg"] == pytest.approx(159.9)


def test_line_band_masses_are_error_function_exact():
    grid = OmegaGrid(0.5, 12.0, 200)
    sc = _scenario(9e16, coherent_stats, grid)
    curve = energy_spectrum(sc, BACK)
    pk = curve.peaks[0]
    lo, hi = pk.center - 0.5 * pk.sigma, pk.center + 2.0 * pk.sigma
    want = pk.mass * (ndtr(2.0) - ndtr(-0.5))
    assert band_integrate(
        SpectralCurve(omega=curve.omega, smooth=np.zeros_like(curve.omega),
                      peaks=(pk,)), (lo, hi)) == pytest.approx(want, rel=1e-12)


def test_drive_average_linewidths_grow_with_order():
    grid = OmegaGrid(0.5, 12.0, 200)
    lit = _scenario(9e16, coherent_stats, grid)
    avg = _scenario(9e16, coherent_stats, grid, broadening="drive_average")
    curve_lit = energy_spectrum(lit, BACK)
    curve_avg = energy_spectrum(avg, BACK)
    assert all(pk.sigma == lit.drive.delta_omega for pk in curve_lit.peaks)
    sig = {i + 1: pk.sigma for i, pk in enumerate(curve_avg.peaks[:3])}
    # d omega'_s / d nu ~ s near backscatter, so widths scale with order
    assert sig[2] / sig[1] == pytest.approx(2.0, rel=1e-2)
    assert sig[3] / sig[1] == pytest.approx(3.0, rel=1e-2)
    # masses are the same under either reading
    for a, b in zip(curve_lit.peaks[:3], curve_avg.peaks[:3]):
        assert a.mass == pytest.approx(b.mass, rel=1e-12)


def test_azimuth_never_enters_axis_aligned_scans():
    grid = OmegaGrid(0.5, 6.0, 300)
    for electron in (AT_REST, HEAD_ON):
        sc = _scenario(9e16, thermal_stats, grid, electron=electron)
        base = energy_spectrum(sc, EmissionGeometry(theta=2.0, phi=0.0))
        floor = 1e-12 * float(base.values.max())
        for phi in (1.0, math.pi, 5.0):
            curve = energy_spectrum(sc, EmissionGeometry(theta=2.0, phi=phi))
            np.testing.assert_allclose(curve.values, base.values,
                                       rtol=1e-10, atol=floor)


# ------------------------------------------------------- band integration

def test_band_integrate_exact_on_linear_plus_peak():
    x = np.linspace(0.0, 10.0, 11) + 1.0
    smooth = 2.0 + 3.0 * x
    pk = GaussianPeak(center=6.0, mass=2.0, sigma=0.1)
    curve = SpectralCurve(omega=x, smooth=smooth, peaks=(pk,))
    lo, hi = 1.35, 8.77
    linear_part = 2.0 * (hi - lo) + 1.5 * (hi * hi - lo * lo)
    peak_part = 2.0 * (ndtr((hi - 6.0) / 0.1) - ndtr((lo - 6.0) / 0.1))
    got = band_integrate(curve, (lo, hi))
    assert got == pytest.approx(linear_part + peak_part, rel=1e-12)
    with pytest.raises(ValueError):
        band_integrate(curve, (3.0, 3.0))


def test_band_integrate_model_converges_quadratically():
    # sampled Gaussian: the piecewise-linear model error falls like h^2
    sigma, center = 0.35, 5.0
    lo, hi = 4.1, 6.3
    exact = ndtr((hi - center) / sigma) - ndtr((lo - center) / sigma)
    errs = {}
    for n in (201, 401, 801, 3201):
        x = np.linspace(0.0, 10.0, n)
        y = np.exp(-0.5 * ((x - center) / sigma) ** 2) / (
            sigma * math.sqrt(2.0 * math.pi))
        curve = SpectralCurve(omega=x, smooth=y)
        errs[n] = abs(band_integrate(curve, (lo, hi)) - exact) / exact
    assert errs[201] / errs[401] == pytest.approx(4.0, rel=0.2)
    assert errs[401] / errs[801] == pytest.approx(4.0, rel=0.2)
    assert errs[3201] < 1e-6


def test_band_integral_grid_refinement_thermal():
    # doubling the sampling grid moves the band energy by < 5e-6: the
    # curve model is converged at the tolerance band_integrate claims
    geom = BACK
    vals = {}
    for n in (12000, 24000):
        sc = _scenario(9e17, thermal_stats, OmegaGrid(0.02, 12.0, n))
        curve = energy_spectrum(sc, geom)
        for band in ((2.0, 8.0), (6.0, 10.0)):
            vals.setdefault(band, []).append(band_integrate(curve, band))
    for band, (coarse, fine) in vals.items():
        assert abs(coarse - fine) / abs(fine) < 5e-6, band


# ------------------------------------------------------- angular scans

def test_angular_distribution_against_direct_spectra():
    thetas = tuple(math.radians(d) for d in (95.0, 120.0, 145.0, 170.0))
    band = (1719.4, 3438.8)
    sc = _scenario(9e16, thermal_stats, OmegaGrid(band[0], band[1], 96),
                   electron=HEAD_ON, thetas=thetas)
    curve = angular_distribution(sc, band)
    assert isinstance(curve, AngularCurve)
    assert curve.values.shape == (4,)
    # spot-check one angle against an explicitly assembled spectrum
    geom = EmissionGeometry(theta=thetas[1])
    direct = band_integrate(energy_spectrum(sc, geom), band)
    assert curve.values[1] == pytest.approx(direct, rel=1e-9)
    # jacobian flag multiplies by sin(theta')
    jac = angular_distribution(sc, band, jacobian=True)
    np.testing.assert_allclose(jac.values,
                               curve.values * np.sin(curve.theta),
                               rtol=1e-12)
    assert curve.metadata["band_eV"] == [band[0], band[1]]


def test_angular_distribution_worker_count_invariant():
    thetas = tuple(math.radians(d) for d in np.linspace(100.0, 170.0, 6))
    band = (1719.4, 3438.8)
    sc = _scenario(9e16, bsv_stats, OmegaGrid(band[0], band[1], 64),
                   electron=HEAD_ON, thetas=thetas)
    serial = angular_distribution(sc, band, workers=1)
    threaded = angular_distribution(sc, band, workers=4)
    assert np.array_equal(serial.values, threaded.values)


def test_dead_band_returns_zero():
    thetas = (math.radians(120.0), math.radians(160.0))
    sc = _scenario(9e15, thermal_stats, OmegaGrid(1.0, 5.0, 64),
                   thetas=thetas)
    curve = angular_distribution(sc, (1.0e7, 2.0e7))
    assert np.all(curve.values == 0.0)


def test_unreachable_band_raises_nonconvergence():
    # below the ceiling but reachable only at orders ~1e6: must raise,
    # not silently return zero
    thetas = (math.radians(30.0),)
    sc = _scenario(9e15, thermal_stats, OmegaGrid(1.0, 5.0, 64),
                   thetas=thetas)
    with pytest.raises(TruncationNotConverged):
        angular_distribution(sc, (1.0e6, 2.0e6))


def test_angular_scan_requires_thetas():
    sc = _scenario(9e15, thermal_stats, OmegaGrid(1.0, 5.0, 64))
    with pytest.raises(ValueError):
        angular_distribution(sc, (1.0, 2.0))


# ------------------------------------------------------- diagnostics

def test_diagnostics_accumulate_across_passes():
    sc = _scenario(9e16, thermal_stats, OmegaGrid(0.5, 6.0, 120))
    diag = {}
    energy_spectrum(sc, BACK, diagnostics=diag)
    assert diag["points"] > 120          # includes the sampling wings
    assert diag["highest_order"] >= 1
    diag2 = {}
    sc2 = _scenario(9e16, coherent_stats, OmegaGrid(0.5, 8.0, 120))
    energy_spectrum(sc2, BACK, diagnostics=diag2)
    assert diag2["highest_order"] >= 3   # lines near 2.25, 4.5, 6.75 eV
