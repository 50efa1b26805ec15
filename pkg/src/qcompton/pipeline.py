"""Observable curves built on top of the pointwise spectral density.

The emission module answers "power per unit frequency per steradian at
one point".  Experiments measure something else: an energy spectrum
recorded over a finite pulse, with every feature smeared by the drive
bandwidth, or the energy collected in a frequency band as a function of
emission angle.  This module assembles those observables:

  * energy_spectrum   -- Gaussian-broadened curve times the pulse
                         duration T = 2 pi / delta_omega,
  * angular_distribution -- band-integrated energy per steradian over a
                         polar-angle scan,
  * band_integrate    -- energy in [lo, hi] from a sampled curve.

Broadening comes in two readings.  "literal" convolves the emitted
spectrum with a fixed Gaussian of standard deviation delta_omega, and
turns each discrete line of a coherent-like drive into a Gaussian of the
same width.  "drive_average" instead averages the spectrum over the
drive frequency nu ~ N(omega, delta_omega^2) at fixed energy density,
which makes line widths grow with the harmonic order.  Both are exposed;
neither is privileged by the physics at the bandwidths considered here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import ndtr

from .minkowski import (ElectronState, EmissionGeometry, FourVector,
                        KinematicallyForbidden, photon_wavevector)
from .units import NaturalDrive, pulse_duration
from .photon_statistics import PhaseAveragedStatistics
from . import emission

# Gaussians are treated as identically zero beyond this many standard
# deviations; at 9 sigma the truncated mass is ~1e-19 of the total,
# far below every tolerance used downstream.
KERNEL_REACH = 9.0

# Gauss-Hermite order for the drive-frequency average.  21 nodes
# integrate polynomials up to degree 41 exactly; the density varies on
# the scale of omega while the weight has width delta_omega << omega.
_HERMITE_ORDER = 21

# Coherent ladders are resolved in batches of this many orders; the
# batch loop stops once a whole batch contributes less than rel_tol of
# the accumulated line weight.
_LADDER_BATCH = 256

BROADENING_MODES = ("literal", "drive_average")


@dataclass(frozen=True)
class OmegaGrid:
    """Emitted-frequency grid: [lo, hi] eV, `count` nodes, linear or log."""

    lo: float
    hi: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if not self.lo > 0.0:
            raise ValueError(f"grid lower edge must be > 0, got {self.lo}")
        if not self.hi > self.lo:
            raise ValueError(
                f"grid upper edge must exceed the lower, got [{self.lo}, {self.hi}]")
        if self.count < 2:
            raise ValueError(f"grid needs at least 2 nodes, got {self.count}")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"spacing must be 'linear' or 'log', got "
                             f"{self.spacing!r}")

    def points(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class Scenario:
    """One physical configuration: electron, drive, statistics, grids.

    The drive propagates along +z with circular polarization; thetas
    holds the polar-angle scan (radians) used by angular_distribution,
    while spectra are evaluated at an explicitly supplied geometry.
    """

    electron: ElectronState
    drive: NaturalDrive
    stats: PhaseAveragedStatistics
    omega_grid: OmegaGrid
    thetas: tuple = ()
    phi: float = 0.0
    broadening: str = "literal"
    rel_tol: float = emission.DEFAULT_REL_TOL
    s_max: int = emission.DEFAULT_S_MAX

    def __post_init__(self):
        if self.broadening not in BROADENING_MODES:
            raise ValueError(f"broadening must be one of {BROADENING_MODES}, "
                             f"got {self.broadening!r}")
        if abs(self.stats.omega - self.drive.omega) > 1e-9 * self.drive.omega:
            raise ValueError(
                "statistics were built for drive frequency %g eV but the "
                "scenario drive is %g eV" % (self.stats.omega, self.drive.omega))
        for th in self.thetas:
            if not 0.0 <= th <= math.pi:
                raise ValueError(f"scan angle {th} outside [0, pi]")

    def wavevector(self) -> FourVector:
        return photon_wavevector(self.drive.omega, 0.0, 0.0)


@dataclass(frozen=True)
class GaussianPeak:
    """One broadened spectral line: integrated energy `mass` (eV/sr),
    center and standard deviation in eV."""

    center: float
    mass: float
    sigma: float

    def profile(self, omega_prime: np.ndarray) -> np.ndarray:
        z = (omega_prime - self.center) / self.sigma
        out = np.zeros_like(z)
        near = np.abs(z) < KERNEL_REACH
        out[near] = (self.mass / (self.sigma * math.sqrt(2.0 * math.pi))
                     * np.exp(-0.5 * z[near] * z[near]))
        return out

    def band_mass(self, lo: float, hi: float) -> float:
        return self.mass * float(ndtr((hi - self.center) / self.sigma)
                                 - ndtr((lo - self.center) / self.sigma))


@dataclass(frozen=True)
class SpectralCurve:
    """Energy per unit emitted frequency per steradian on a frequency grid.

    The smooth part is sampled on `omega`; discrete lines are kept as
    analytic Gaussians so that band integrals of lines are exact
    (error-function form) rather than grid-limited.
    """

    omega: np.ndarray
    smooth: np.ndarray
    peaks: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.omega.ndim != 1 or self.omega.size < 2:
            raise ValueError("curve needs a 1-D grid with at least 2 nodes")
        if np.any(np.diff(self.omega) <= 0.0):
            raise ValueError("curve grid must be strictly increasing")
        if self.smooth.shape != self.omega.shape:
            raise ValueError("ordinate shape does not match the grid")
        if np.any(self.smooth < 0.0):
            raise ValueError("curve ordinates must be >= 0")

    @property
    def values(self) -> np.ndarray:
        out = self.smooth.copy()
        for pk in self.peaks:
            out += pk.profile(self.omega)
        return out


@dataclass(frozen=True)
class AngularCurve:
    """Band-integrated energy per steradian versus polar angle."""

    theta: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)


def _gaussian_convolve_linear(x_nodes, y_nodes, sigma, x_eval):
    """Convolve a piecewise-linear function with a Gaussian, exactly.

    The data (x_nodes, y_nodes) define a piecewise-linear density that
    is zero outside [x_nodes[0], x_nodes[-1]].  Each linear segment
    convolved with N(0, sigma^2) has a closed form in the normal cdf and
    pdf, so the result carries no quadrature error -- only the segments
    within KERNEL_REACH sigmas of an evaluation point are touched.
    """
    x_nodes = np.asarray(x_nodes, dtype=float)
    y_nodes = np.asarray(y_nodes, dtype=float)
    x_eval = np.asarray(x_eval, dtype=float)
    out = np.zeros_like(x_eval)
    reach = KERNEL_REACH * sigma
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    for i in range(x_nodes.size - 1):
        x0, x1 = x_nodes[i], x_nodes[i + 1]
        y0, y1 = y_nodes[i], y_nodes[i + 1]
        if y0 == 0.0 and y1 == 0.0:
            continue
        j0 = np.searchsorted(x_eval, x0 - reach, side="left")
        j1 = np.searchsorted(x_eval, x1 + reach, side="right")
        if j0 == j1:
            continue
        t = x_eval[j0:j1]
        b = (y1 - y0) / (x1 - x0)
        a = y0 - b * x0
        lo = (x0 - t) / sigma
        hi = (x1 - t) / sigma
        phi_lo = norm * np.exp(-0.5 * lo * lo)
        phi_hi = norm * np.exp(-0.5 * hi * hi)
        out[j0:j1] += ((a + b * t) * (ndtr(hi) - ndtr(lo))
                       + b * sigma * sigma * (phi_lo - phi_hi))
    # roundoff can leave tiny negative residue where the curve vanishes
    return np.maximum(out, 0.0)


def _extended_nodes(grid: np.ndarray, sigma: float) -> np.ndarray:
    """User grid plus sampling wings one kernel reach past both ends.

    Without the wings, density just outside the requested window could
    not bleed into it under convolution.  Wing spacing is the finer of
    the grid's own median step and sigma/2.
    """
    reach = KERNEL_REACH * sigma
    step = min(float(np.median(np.diff(grid))), 0.5 * sigma)
    n = max(2, int(math.ceil(reach / step)))
    left = grid[0] - reach * np.linspace(1.0, 0.0, n, endpoint=False)
    left = left[left > 0.0]
    right = grid[-1] + reach * np.linspace(0.0, 1.0, n + 1)[1:]
    return np.concatenate([left, grid, right])


def _ladder(stats, p, k, geometry, w_max, rel_tol, s_max):
    """All coherent lines below w_max, truncated by accumulated weight.

    Lines gather toward the absolute ceiling as the order grows, so a
    frequency bound alone cannot stop the scan; batches of orders are
    resolved until a whole batch adds less than rel_tol of the running
    total weight.
    """
    entries = []
    total = 0.0
    s_lo = 1
    while s_lo <= s_max:
        s_hi = min(s_lo + _LADDER_BATCH - 1, s_max)
        batch = emission.coherent_peaks(stats, p, k, geometry,
                                        range(s_lo, s_hi + 1))
        batch = [q for q in batch if q.omega_prime <= w_max]
        entries.extend(batch)
        got = sum(q.weight for q in batch)
        total += got
        if not batch or (total > 0.0 and got <= rel_tol * total):
            return entries
        s_lo = s_hi + 1
    raise emission.TruncationNotConverged(
        f"coherent ladder still gaining weight at order {s_max}")


def _peak_sigmas(scenario: Scenario, geometry, entries):
    """Line widths for the drive-average reading: |d omega'_s / d nu|
    times the bandwidth, by centered difference at fixed energy density."""
    omega = scenario.drive.omega
    sigma = scenario.drive.delta_omega
    u = omega * scenario.drive.rho
    p = scenario.electron.p
    sides = {}
    orders = [q.order for q in entries]
    if not orders:
        return {}
    for sgn in (-1.0, +1.0):
        nu = omega + sgn * sigma
        k_nu = photon_wavevector(nu, 0.0, 0.0)
        stats_nu = scenario.stats.with_drive(nu, u / nu)
        pk = emission.coherent_peaks(stats_nu, p, k_nu, geometry,
                                     range(min(orders), max(orders) + 1))
        sides[sgn] = {q.order: q.omega_prime for q in pk}
    widths = {}
    for q in entries:
        hi = sides[+1.0].get(q.order)
        lo = sides[-1.0].get(q.order)
        if hi is not None and lo is not None:
            widths[q.order] = abs(hi - lo) / 2.0
        elif hi is not None:
            widths[q.order] = abs(hi - q.omega_prime)
        elif lo is not None:
            widths[q.order] = abs(q.omega_prime - lo)
        else:
            widths[q.order] = sigma
    return widths


def _merge_diagnostics(dst: dict | None, src: dict) -> None:
    """Fold one engine pass into an accumulated diagnostics dict."""
    if dst is None or not src:
        return
    dst["points"] = dst.get("points", 0) + src.get("points", 0)
    dst["highest_order"] = max(dst.get("highest_order", 0),
                               src.get("highest_order", 0))
    dst["orders_scanned"] = max(dst.get("orders_scanned", 0),
                                src.get("orders_scanned", 0))
    dst["edge_guarded"] = dst.get("edge_guarded", 0) + src.get("edge_guarded", 0)


def energy_spectrum(scenario: Scenario, geometry: EmissionGeometry,
                    diagnostics: dict | None = None) -> SpectralCurve:
    """Broadened energy spectrum (eV per eV per sr) at one direction.

    The power spectral density is resolved on the scenario grid (smooth
    drives) or into discrete lines (coherent-like drives), broadened
    according to scenario.broadening, and multiplied by the pulse
    duration T = 2 pi / delta_omega.  A caller-supplied diagnostics dict
    accumulates engine truncation counters across all internal passes.
    """
    grid = scenario.omega_grid.points()
    p = scenario.electron.p
    k = scenario.wavevector()
    ceiling = emission.absolute_frequency_ceiling(p, k, geometry)
    if grid[-1] > 1.05 * ceiling:
        raise KinematicallyForbidden(
            "grid extends to %g eV but no emission is possible above "
            "%g eV at this angle" % (grid[-1], ceiling))
    sigma = scenario.drive.delta_omega
    t_pulse = pulse_duration(sigma).per_eV
    meta = {
        "state": scenario.stats.label,
        "omega_eV": scenario.drive.omega,
        "rho_eV3": scenario.drive.rho,
        "delta_omega_eV": sigma,
        "theta_deg": math.degrees(geometry.theta),
        "phi_deg": math.degrees(geometry.phi),
        "broadening": scenario.broadening,
        "gamma": scenario.electron.gamma,
        "direction": list(scenario.electron.direction),
    }
    engine = dict(rel_tol=scenario.rel_tol, s_max=scenario.s_max)

    if scenario.stats.is_atomic:
        w_top = min(grid[-1] + KERNEL_REACH * sigma * 2.0, ceiling)
        entries = _ladder(scenario.stats, p, k, geometry, w_top,
                          scenario.rel_tol, scenario.s_max)
        if scenario.broadening == "drive_average":
            widths = _peak_sigmas(scenario, geometry, entries)
        else:
            widths = {q.order: sigma for q in entries}
        peaks = tuple(GaussianPeak(center=q.omega_prime,
                                   mass=t_pulse * q.weight,
                                   sigma=widths[q.order])
                      for q in entries)
        _merge_diagnostics(diagnostics, {
            "points": grid.size,
            "highest_order": max((q.order for q in entries), default=0),
            "orders_scanned": max((q.order for q in entries), default=0),
            "edge_guarded": 0,
        })
        smooth = np.zeros_like(grid)
        return SpectralCurve(omega=grid, smooth=smooth, peaks=peaks,
                             metadata=meta)

    if scenario.broadening == "drive_average":
        nodes, wts = hermgauss(_HERMITE_ORDER)
        u = scenario.drive.omega * scenario.drive.rho
        acc = np.zeros_like(grid)
        for x, w in zip(nodes, wts):
            nu = scenario.drive.omega + math.sqrt(2.0) * sigma * x
            k_nu = photon_wavevector(nu, 0.0, 0.0)
            stats_nu = scenario.stats.with_drive(nu, u / nu)
            diag = {} if diagnostics is not None else None
            acc += (w / math.sqrt(math.pi)) * emission.smooth_spectral_density(
                stats_nu, p, k_nu, geometry, grid, diagnostics=diag, **engine)
            if diag is not None:
                _merge_diagnostics(diagnostics, diag)
        smooth = t_pulse * acc
    else:
        nodes = _extended_nodes(grid, sigma)
        diag = {} if diagnostics is not None else None
        density = emission.smooth_spectral_density(
            scenario.stats, p, k, geometry, nodes, diagnostics=diag, **engine)
        if diag is not None:
            _merge_diagnostics(diagnostics, diag)
        smooth = t_pulse * _gaussian_convolve_linear(nodes, density,
                                                     sigma, grid)
    return SpectralCurve(omega=grid, smooth=smooth, metadata=meta)


def band_integrate(curve: SpectralCurve, band) -> float:
    """Energy per steradian in [lo, hi]: exact on the curve's model.

    The smooth part is integrated as the piecewise-linear interpolant it
    is (exact, including fractional end segments); analytic peaks
    contribute their error-function band mass.  Model error is set by
    the sampling grid and is the caller's concern.
    """
    lo, hi = float(band[0]), float(band[1])
    if not hi > lo:
        raise ValueError(f"band must satisfy lo < hi, got [{lo}, {hi}]")
    x = curve.omega
    y = curve.smooth
    a, b = max(lo, x[0]), min(hi, x[-1])
    total = 0.0
    if b > a:
        inner = x[(x > a) & (x < b)]
        xs = np.concatenate([[a], inner, [b]])
        ys = np.interp(xs, x, y)
        total += float(np.trapezoid(ys, xs))
    for pk in curve.peaks:
        total += pk.band_mass(lo, hi)
    return total


def angular_distribution(scenario: Scenario, band, *,
                         jacobian: bool = False, workers: int = 1,
                         diagnostics: dict | None = None) -> AngularCurve:
    """Band-integrated energy per steradian across the polar-angle scan.

    For each scan angle the energy spectrum is rebuilt on an internal
    grid covering the band (clipped to the kinematic ceiling) and
    integrated over [lo, hi].  Values are per steradian; jacobian=True
    multiplies by sin(theta') for per-polar-angle reading.  Angles are
    independent, so workers > 1 spreads them over a thread pool; the
    reduction is by index and the result identical for any worker count.
    """
    lo, hi = float(band[0]), float(band[1])
    if not hi > lo:
        raise ValueError(f"band must satisfy lo < hi, got [{lo}, {hi}]")
    if not scenario.thetas:
        raise ValueError("scenario has no polar-angle scan")
    p = scenario.electron.p
    k = scenario.wavevector()
    count = max(scenario.omega_grid.count, 64)

    def one_angle(th: float) -> tuple[float, dict]:
        geometry = EmissionGeometry(theta=th, phi=scenario.phi)
        ceiling = emission.absolute_frequency_ceiling(p, k, geometry)
        g_lo = max(lo, 1e-6 * scenario.drive.omega)
        g_hi = min(hi, ceiling)
        if not g_hi > g_lo:
            return 0.0, {}
        local = replace(scenario, omega_grid=OmegaGrid(g_lo, g_hi, count))
        diag: dict = {}
        curve = energy_spectrum(local, geometry, diagnostics=diag)
        value = band_integrate(curve, (lo, hi))
        if jacobian:
            value *= math.sin(th)
        return value, diag

    values = np.empty(len(scenario.thetas))
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_angle, scenario.thetas))
    else:
        results = [one_angle(th) for th in scenario.thetas]
    for i, (value, diag) in enumerate(results):
        values[i] = value
        _merge_diagnostics(diagnostics, diag)
    meta = {
        "state": scenario.stats.label,
        "omega_eV": scenario.drive.omega,
        "rho_eV3": scenario.drive.rho,
        "band_eV": [lo, hi],
        "jacobian": jacobian,
        "broadening": scenario.broadening,
    }
    return AngularCurve(theta=np.asarray(scenario.thetas, dtype=float),
                        values=values, metadata=meta)
