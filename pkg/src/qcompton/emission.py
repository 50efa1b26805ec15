"""Emission spectra of an electron driven by an intense quantized light mode.

Physics core.  Computes the per-frequency, per-solid-angle emitted power of
nonlinear Compton scattering where the drive's quantum state enters only
through its phase-averaged field statistics R(E): each harmonic order s
(the number of absorbed drive photons) contributes at a single effective
field amplitude E_s fixed by the scattering kinematics, weighted by R(E_s).

Conventions: natural units, energies in eV.  The drive is a monochromatic
photon mode k propagating along +z with circular polarization; the
electron four-momentum p may point anywhere.  The emitted mode k' is
parameterized by (theta', phi') measured from +z.

Smooth statistics go through the harmonic sum directly
(smooth_spectral_density); coherent-like statistics concentrate R into a
single amplitude, so each harmonic collapses to a delta line in omega'
that is resolved analytically (coherent_peaks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .constants import E_CHARGE, E_SQUARED
from .minkowski import (EmissionGeometry, FourVector, circular_polarization,
                        mdot, photon_wavevector, scattered_momentum)
from .photon_statistics import PhaseAveragedStatistics
from .special_functions import bessel_j_triple

DEFAULT_REL_TOL = 1e-10     # truncation: term / accumulated sum
DEFAULT_PATIENCE = 5        # consecutive below-tolerance orders required
DEFAULT_S_MAX = 100_000     # hard cap on the harmonic order

# Below this fraction of sqrt(2 omega rho) the effective field counts as
# sitting on the kinematic edge: the squared amplitude in the emission
# bracket vanishes like E_s^2 and beats any integrable R(E) divergence,
# so the term is an exact zero for our purposes.
EDGE_FIELD_FRACTION = 1e-8

# Below this argument the Bessel-square combinations are evaluated by
# their leading-order expansions; the direct difference loses all digits.
SMALL_XI = 1e-8

_EPS = np.finfo(float).eps

# Kinematically forbidden orders are reported as this marker, not as an
# exception: hitting the theta cutoff is an ordinary outcome.
NOT_ALLOWED = None


class TruncationNotConverged(RuntimeError):
    """Harmonic sum hit the order cap before meeting the tolerance."""


@dataclass(frozen=True)
class HarmonicTerm:
    """Per-order quantities of the emission amplitude at one (k', p)."""

    order: int
    effective_field: float    # E_s, eV^2 (0 when not allowed)
    zeta: float
    xi: float
    t2: float                 # spin/phase-averaged squared amplitude
    allowed: bool


@dataclass(frozen=True)
class PeakEntry:
    """One coherent-drive emission line: order, position, integrated power.

    weight is the emitted power per steradian integrated across the line
    (the omega'-delta resolved analytically).
    """

    order: int
    omega_prime: float        # eV
    weight: float             # eV^2 per steradian


def _check_drive_match(stats: PhaseAveragedStatistics, k: FourVector) -> None:
    if abs(k.t - stats.omega) > 1e-9 * stats.omega:
        raise ValueError(
            f"statistics built for omega={stats.omega} eV but drive photon "
            f"has omega={k.t} eV")


def _check_polarization(k: FourVector) -> None:
    eps = circular_polarization()
    if abs(mdot(k, eps)) > 1e-12 * k.t:
        raise ValueError("built-in circular polarization requires the drive "
                         "to propagate along +z")


def effective_field(s: int, p: FourVector, k: FourVector,
                    kprime: FourVector):
    """Effective field amplitude E_s (eV^2) for order-s emission into k'.

    Returns NOT_ALLOWED (None) when the order is kinematically forbidden,
    i.e. the cutoff combination s(k.p - k.k') - p.k' is negative beyond
    roundoff; an exact zero at the cutoff itself.
    """
    if s < 1:
        raise ValueError(f"harmonic order must be >= 1, got {s}")
    kp = mdot(k, p)
    kkp = mdot(k, kprime)
    pkp = mdot(p, kprime)
    theta_arg = s * (kp - kkp) - pkp
    scale = s * (abs(kp) + abs(kkp)) + abs(pkp)
    if theta_arg <= -32.0 * _EPS * scale:
        return NOT_ALLOWED
    theta_arg = max(theta_arg, 0.0)
    if kkp == 0.0:
        return math.inf
    omega = k.t
    return math.sqrt(4.0 * omega * omega * kp * theta_arg
                     / (E_SQUARED * kkp))


def kinematic_max_frequency(s: int, p: FourVector, k: FourVector,
                            geometry: EmissionGeometry) -> float:
    """Largest emitted frequency (eV) with order-s support in direction k'.

    Both k.k' and p.k' are linear in omega', so the cutoff solves in
    closed form: omega'_max = s (k.p) / (s kappa + pi') with kappa, pi'
    the direction-only invariants k.n' and p.n'.
    """
    if s < 1:
        raise ValueError(f"harmonic order must be >= 1, got {s}")
    nprime = photon_wavevector(1.0, geometry.theta, geometry.phi)
    kappa = mdot(k, nprime)
    piprime = mdot(p, nprime)
    return s * mdot(k, p) / (s * kappa + piprime)


def absolute_frequency_ceiling(p: FourVector, k: FourVector,
                               geometry: EmissionGeometry) -> float:
    """s -> infinity accumulation point of the per-order cutoffs."""
    nprime = photon_wavevector(1.0, geometry.theta, geometry.phi)
    kappa = mdot(k, nprime)
    if kappa <= 0.0:
        return math.inf
    return mdot(k, p) / kappa


def harmonic_coefficients(s: int, p: FourVector, k: FourVector,
                          kprime: FourVector, e_s):
    """(zeta_s, xi_s) for the order-s amplitude; propagates NOT_ALLOWED.

    zeta_s scales the sideband combination, xi_s is the Bessel argument;
    the modulus inside xi_s is a complex modulus (the polarization is
    complex for circular light).
    """
    if e_s is NOT_ALLOWED:
        return NOT_ALLOWED
    pprime = scattered_momentum(p, k, kprime)
    omega = k.t
    kp = mdot(k, p)
    kpp = mdot(k, kprime)
    kppr = mdot(k, pprime)
    # 1/(k.p') - 1/(k.p) written as k.k'/((k.p')(k.p)): identical because
    # k.p' = k.p - k.k' exactly for lightlike k, but free of the digit
    # loss the raw reciprocal difference suffers when k.k' << k.p
    zeta = (E_SQUARED * e_s * e_s / (4.0 * omega * omega)) \
        * kpp / (kppr * kp)
    eps = circular_polarization()
    d = mdot(p, eps) / kp - mdot(pprime, eps) / kppr
    xi = E_CHARGE * (e_s / omega) * abs(d)
    return zeta, xi


def bessel_bracket(s: int, xi, zeta_x):
    """zeta_x (J_{s-1}^2 + J_{s+1}^2 - 2 J_s^2) - J_s^2 at argument xi.

    Single source of truth for the small-argument switchover: below
    SMALL_XI the sideband difference is O(xi^{2s-2}) and the direct
    evaluation cancels catastrophically, so leading-order expansions are
    used instead (for s = 1 the difference tends to 1, for s >= 2 it is
    J_{s-1}^2 evaluated in log space).
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    zeta_x = np.broadcast_to(np.asarray(zeta_x, dtype=float), xi.shape)
    out = np.empty_like(xi)

    small = xi < SMALL_XI
    if small.any():
        xs = xi[small]
        zx = zeta_x[small]
        if s == 1:
            out[small] = zx * (1.0 - xs * xs) - 0.25 * xs * xs
        else:
            with np.errstate(divide="ignore"):
                jm2 = np.where(
                    xs > 0.0,
                    np.exp(2.0 * ((s - 1) * np.log(xs / 2.0) - gammaln(s))),
                    0.0)
            out[small] = zx * jm2

    big = ~small
    if big.any():
        jm, jc, jp = bessel_j_triple(s, xi[big])
        dj = jm * jm + jp * jp - 2.0 * jc * jc
        out[big] = zeta_x[big] * dj - jc * jc
    return out


def t_squared(s: int, p: FourVector, k: FourVector, kprime: FourVector,
              e_s):
    """Spin/phase-averaged squared emission amplitude of order s.

    Literal transcription: e^2 m^2/(p^t p^t') [zeta_s X (J_{s-1}^2 +
    J_{s+1}^2 - 2 J_s^2) - J_s^2] with X = ((p'.k)^2 + (p.k)^2) /
    (2 m^2 k.k').  Propagates NOT_ALLOWED.
    """
    if e_s is NOT_ALLOWED:
        return NOT_ALLOWED
    pprime = scattered_momentum(p, k, kprime)
    zeta, xi = harmonic_coefficients(s, p, k, kprime, e_s)
    kp = mdot(k, p)
    kkp = mdot(k, kprime)
    kpp = mdot(k, pprime)
    m2 = mdot(p, p)
    x = (kpp * kpp + kp * kp) / (2.0 * m2 * kkp)
    bracket = float(bessel_bracket(s, xi, zeta * x)[0])
    return E_SQUARED * m2 / (p.t * pprime.t) * bracket


def harmonic_term(s: int, p: FourVector, k: FourVector,
                  kprime: FourVector) -> HarmonicTerm:
    """All order-s quantities at one emission four-momentum."""
    e_s = effective_field(s, p, k, kprime)
    if e_s is NOT_ALLOWED:
        return HarmonicTerm(order=s, effective_field=0.0, zeta=0.0, xi=0.0,
                            t2=0.0, allowed=False)
    zeta, xi = harmonic_coefficients(s, p, k, kprime, e_s)
    return HarmonicTerm(order=s, effective_field=e_s, zeta=zeta, xi=xi,
                        t2=t_squared(s, p, k, kprime, e_s), allowed=True)


def spectral_density_points(stats: PhaseAveragedStatistics, p: FourVector,
                            k: FourVector, theta, phi, omega_prime, *,
                            rel_tol: float = DEFAULT_REL_TOL,
                            s_max: int = DEFAULT_S_MAX,
                            patience: int = DEFAULT_PATIENCE,
                            diagnostics: dict | None = None) -> np.ndarray:
    """Emitted power per unit omega' per steradian at flattened points.

    The workhorse behind smooth_spectral_density and the pipeline's
    angular scans: theta, phi, omega_prime are equal-length 1-D arrays,
    each entry one (direction, frequency) evaluation point.  All points
    share one pass over the harmonic order, so the expensive Bessel
    evaluations are vectorized across whatever points are still active
    at that order.

    Per point, the sum starts at the lowest kinematically allowed order
    and stops once `patience` consecutive orders contribute less than
    rel_tol of the running sum (terms are accumulated in log space with
    a running max-shift, so far-tail orders underflow harmlessly).
    Raises TruncationNotConverged if any point is still live at s_max.
    """
    if stats.is_atomic:
        raise TypeError("atomic-peak statistics produce delta lines; "
                        "use coherent_peaks")
    _check_drive_match(stats, k)
    _check_polarization(k)

    th = np.asarray(theta, dtype=float)
    ph = np.asarray(phi, dtype=float)
    wp = np.asarray(omega_prime, dtype=float)
    if not (th.shape == ph.shape == wp.shape and th.ndim == 1):
        raise ValueError("theta, phi, omega_prime must be equal-length "
                         "1-D arrays")
    if np.any(wp <= 0.0):
        raise ValueError("omega_prime must be > 0")
    n_pts = th.size

    omega = k.t
    kp = mdot(k, p)
    m2 = mdot(p, p)
    pt = p.t
    eps = circular_polarization()
    pe = mdot(p, eps)

    sin_th = np.sin(th)
    nx = sin_th * np.cos(ph)
    ny = sin_th * np.sin(ph)
    nz = np.cos(th)
    kappa = k.t - k.x * nx - k.y * ny - k.z * nz
    piprime = pt - p.x * nx - p.y * ny - p.z * nz
    ke_unit = -(eps.x * nx + eps.y * ny + eps.z * nz)   # (k'.eps) / omega'

    kkp = wp * kappa                      # k.k'
    kpprime = kp - kkp                    # k.p'
    alive = (kappa > 0.0) & (kpprime > 0.0)

    density = np.zeros(n_pts)
    if diagnostics is not None:
        diagnostics.update(points=n_pts, highest_order=0, orders_scanned=0,
                           edge_guarded=0)
    if not alive.any():
        return density

    # s-independent per-point quantities
    with np.errstate(divide="ignore", invalid="ignore"):
        d_cplx = pe / kp - (pe - wp * ke_unit) / kpprime
        abs_d = np.abs(d_cplx)
        x_fac = (kpprime * kpprime + kp * kp) / (2.0 * m2 * kkp)
        prefactor = (omega * omega * wp * m2 * kp
                     / (4.0 * math.pi ** 2 * pt * kappa))
        b_lin = wp * piprime              # theta argument: s*(k.p') - b_lin
        s_min = np.where(alive, np.floor(b_lin / kpprime) + 1.0, np.inf)
    s_min = np.where(alive & (s_min < 1.0), 1.0, s_min)

    edge_field = EDGE_FIELD_FRACTION * math.sqrt(
        2.0 * stats.omega * stats.rho)
    support_max = stats.support_max

    shift = np.full(n_pts, -np.inf)       # running log-magnitude reference
    acc = np.zeros(n_pts)                 # sum in units of exp(shift)
    streak = np.zeros(n_pts, dtype=np.int64)
    converged = ~alive
    highest_order = 0
    n_guarded = 0

    s = int(s_min[alive].min())
    while s <= s_max:
        idx = np.nonzero(~converged & (s >= s_min))[0]
        if idx.size == 0:
            if np.all(converged):
                break
            s = int(s_min[~converged].min())
            continue

        theta_arg = np.maximum(s * kpprime[idx] - b_lin[idx], 0.0)
        q = np.sqrt(kp * theta_arg / kkp[idx])
        e_field = (2.0 * omega / E_CHARGE) * q
        xi = 2.0 * q * abs_d[idx]
        zeta = theta_arg / kpprime[idx]

        on_edge = e_field < edge_field
        n_guarded += int(on_edge.sum())
        log_term = np.full(idx.size, -np.inf)
        sign = np.zeros(idx.size)
        live = ~on_edge
        if live.any():
            bracket = bessel_bracket(s, xi[live], zeta[live] * x_fac[idx[live]])
            log_w = stats.log_r(e_field[live])
            with np.errstate(divide="ignore", invalid="ignore"):
                lt = np.where(bracket != 0.0,
                              np.log(np.abs(bracket)) + log_w, -np.inf)
            lt = np.where(np.isnan(lt), -np.inf, lt)   # 0 * inf edge cases
            log_term[live] = lt
            sign[live] = np.sign(bracket)

        zero_term = ~np.isfinite(log_term)
        if not np.all(zero_term):
            highest_order = s

        # max-shift accumulation
        grow = log_term > shift[idx]
        if grow.any():
            g = idx[grow]
            acc[g] = acc[g] * np.exp(shift[g] - log_term[grow]) + sign[grow]
            shift[g] = log_term[grow]
        rest = ~grow & ~zero_term
        if rest.any():
            r = idx[rest]
            acc[r] += sign[rest] * np.exp(log_term[rest] - shift[r])

        # convergence bookkeeping: a term is negligible if it is below
        # rel_tol of the running sum; an exact zero with no sum yet only
        # counts once the effective field has left the statistics'
        # support (protects states whose R starts above E = 0).
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.exp(log_term - shift[idx]) / np.abs(acc[idx])
        no_sum = acc[idx] == 0.0
        small_term = np.where(
            no_sum,
            zero_term & (e_field > support_max),
            (ratio < rel_tol) | zero_term)
        streak[idx] = np.where(small_term, streak[idx] + 1, 0)
        converged[idx] |= streak[idx] >= patience
        s += 1

    if not np.all(converged):
        n_bad = int((~converged).sum())
        raise TruncationNotConverged(
            f"{n_bad} of {n_pts} points still above rel_tol={rel_tol} "
            f"at order cap s_max={s_max}")

    out = np.where(alive, prefactor * acc * np.exp(shift), 0.0)
    if diagnostics is not None:
        diagnostics.update(highest_order=highest_order,
                           orders_scanned=min(s, s_max) - 1,
                           edge_guarded=n_guarded)
    return out


def smooth_spectral_density(stats: PhaseAveragedStatistics, p: FourVector,
                            k: FourVector, geometry: EmissionGeometry,
                            omega_prime, **kwargs):
    """Master spectral density at fixed direction, vectorized over omega'.

    Power per unit emitted frequency per steradian (eV per eV per sr in
    natural units).  Scalar omega' in, scalar out.
    """
    scalar = np.isscalar(omega_prime)
    wp = np.atleast_1d(np.asarray(omega_prime, dtype=float))
    th = np.full_like(wp, geometry.theta)
    ph = np.full_like(wp, geometry.phi)
    out = spectral_density_points(stats, p, k, th, ph, wp, **kwargs)
    return float(out[0]) if scalar else out


def _reference_density(p, k, geometry, omega_prime, omega, rho, log_weight,
                       support_max, rel_tol, s_max, patience):
    """Shared harness for the transcribed closed-form spectra.

    Deliberately naive: builds k' as a four-vector, keeps the explicit
    p^t' factor of the printed prefactor (instead of cancelling it), and
    sums harmonics in plain linear arithmetic using the per-order
    operations.  Serves as an independent cross-check of the fused
    engine.
    """
    kprime = photon_wavevector(omega_prime, geometry.theta, geometry.phi)
    kp = mdot(k, p)
    kkp = mdot(k, kprime)
    if kp - kkp <= 0.0:
        return 0.0
    pprime = scattered_momentum(p, k, kprime)
    pref = (omega * omega * omega_prime * omega_prime
            / (4.0 * math.pi ** 2)) * kp / (E_SQUARED * kkp) * pprime.t

    edge_field = EDGE_FIELD_FRACTION * math.sqrt(2.0 * omega * rho)
    total = 0.0
    streak = 0
    s = 1
    while s <= s_max:
        e_s = effective_field(s, p, k, kprime)
        if e_s is NOT_ALLOWED:
            s += 1
            continue
        if e_s < edge_field:
            term = 0.0
        else:
            term = t_squared(s, p, k, kprime, e_s) * math.exp(log_weight(e_s))
        total += term

        if total != 0.0:
            small = abs(term) <= rel_tol * abs(total)
        else:
            small = term == 0.0 and e_s > support_max
        streak = streak + 1 if small else 0
        if streak >= patience:
            return pref * total
        s += 1
    raise TruncationNotConverged(
        f"reference sum above rel_tol={rel_tol} at order cap {s_max}")


def reference_thermal_density(p: FourVector, k: FourVector,
                              geometry: EmissionGeometry,
                              omega_prime: float, rho: float, *,
                              rel_tol: float = DEFAULT_REL_TOL,
                              s_max: int = DEFAULT_S_MAX,
                              patience: int = DEFAULT_PATIENCE) -> float:
    """Transcribed thermal-drive spectral density (independent path).

    Per-order weight exp(-E_s^2 / 2 omega rho) / (omega rho) with the
    printed prefactor, for cross-validation of the generic engine.
    """
    omega = k.t
    wr = omega * rho

    def log_weight(e):
        return -e * e / (2.0 * wr) - math.log(wr)

    return _reference_density(p, k, geometry, omega_prime, omega, rho,
                              log_weight, 40.0 * math.sqrt(2.0 * wr),
                              rel_tol, s_max, patience)


def reference_bsv_density(p: FourVector, k: FourVector,
                          geometry: EmissionGeometry,
                          omega_prime: float, rho: float, *,
                          rel_tol: float = DEFAULT_REL_TOL,
                          s_max: int = DEFAULT_S_MAX,
                          patience: int = DEFAULT_PATIENCE) -> float:
    """Transcribed squeezed-vacuum spectral density (independent path).

    Per-order weight exp(-E_s^2 / 4 omega rho) / (E_s sqrt(pi omega rho)).
    """
    omega = k.t
    wr = omega * rho
    half_log = 0.5 * math.log(math.pi * wr)

    def log_weight(e):
        return -e * e / (4.0 * wr) - math.log(e) - half_log

    return _reference_density(p, k, geometry, omega_prime, omega, rho,
                              log_weight, 40.0 * math.sqrt(4.0 * wr),
                              rel_tol, s_max, patience)


def coherent_peaks(stats: PhaseAveragedStatistics, p: FourVector,
                   k: FourVector, geometry: EmissionGeometry,
                   s_range) -> tuple:
    """Delta-line spectrum for coherent-like drives, resolved analytically.

    For each order s the statistics pin the effective field to the single
    amplitude A, and E_s(omega') = A solves in closed form because
    E_s^2 is a ratio of functions linear in omega'.  Integrating the
    omega'-delta gives each line's weight without any quadrature:

        omega'_s = s (k.p) / (s kappa + pi' + mu),
        mu       = e^2 A^2 kappa / (4 omega^2 k.p),
        weight_s = e^2 m^2 omega'_s^3 bracket_s / (8 pi^2 s (k.p) p^t).

    mu is the intensity-dependent redshift; as A -> 0 each line moves to
    its kinematic cutoff.  Returns a tuple of PeakEntry sorted by order.
    """
    if not stats.is_atomic:
        raise TypeError("smooth statistics have no delta lines; use "
                        "smooth_spectral_density")
    _check_drive_match(stats, k)
    _check_polarization(k)
    amp = stats.peak_amplitude
    if amp <= 0.0:
        raise ValueError("peak amplitude must be > 0 (zero drive density "
                         "emits nothing)")

    omega = k.t
    kp = mdot(k, p)
    m2 = mdot(p, p)
    pt = p.t
    eps = circular_polarization()
    pe = mdot(p, eps)

    nprime = photon_wavevector(1.0, geometry.theta, geometry.phi)
    kappa = mdot(k, nprime)
    piprime = mdot(p, nprime)
    ke_unit = -(eps.x * nprime.x + eps.y * nprime.y + eps.z * nprime.z)
    if kappa <= 0.0:
        return ()

    mu = E_SQUARED * amp * amp * kappa / (4.0 * omega * omega * kp)
    entries = []
    for s in s_range:
        if s < 1:
            raise ValueError(f"harmonic order must be >= 1, got {s}")
        wps = s * kp / (s * kappa + piprime + mu)
        cutoff = s * kp / (s * kappa + piprime)
        if not 0.0 < wps < cutoff:
            continue
        # cancellation-free theta argument at the line position
        theta_arg = s * kp * mu / (s * kappa + piprime + mu)
        kpprime = kp - wps * kappa
        zeta = theta_arg / kpprime
        x_fac = (kpprime * kpprime + kp * kp) / (2.0 * m2 * wps * kappa)
        d_cplx = pe / kp - (pe - wps * ke_unit) / kpprime
        xi = E_CHARGE * (amp / omega) * abs(d_cplx)
        bracket = float(bessel_bracket(s, xi, zeta * x_fac)[0])
        weight = (E_SQUARED * m2 * wps ** 3 * bracket
                  / (8.0 * math.pi ** 2 * s * kp * pt))
        entries.append(PeakEntry(order=int(s), omega_prime=wps,
                                 weight=weight))
    return tuple(entries)
