"""Phase-averaged field statistics: closed forms, moments, tables."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from qcompton.photon_statistics import (NonNormalizable,
                                        PhaseAveragedStatistics, bsv_stats,
                                        cat_limit_stats, coherent_stats,
                                        custom_tabulated_stats,
                                        fock_limit_stats,
                                        mixed_diagonal_stats, moments,
                                        tabulated_stats_from_file,
                                        thermal_stats)

OMEGA = 2.25
RHO = 3.4e-5         # eV^3; arbitrary positive test density


def test_coherent_is_atomic_peak():
    st = coherent_stats(OMEGA, RHO)
    assert st.is_atomic
    assert st.peak_amplitude == pytest.approx(math.sqrt(2.0 * OMEGA * RHO),
                                              rel=1e-15)
    with pytest.raises(TypeError):
        st.log_r(1.0)


def test_fock_and_cat_collapse_to_coherent():
    st_c = coherent_stats(OMEGA, RHO)
    for maker in (fock_limit_stats, cat_limit_stats):
        st = maker(OMEGA, RHO)
        assert st.is_atomic
        assert st.peak_amplitude == st_c.peak_amplitude


def test_thermal_closed_form():
    st = thermal_stats(OMEGA, RHO)
    wr = OMEGA * RHO
    for e in np.geomspace(1e-5, 0.2, 25):
        want = -e * e / (2.0 * wr) - math.log(wr)
        assert st.log_r(float(e)) == pytest.approx(want, rel=1e-13)


def test_bsv_closed_form():
    st = bsv_stats(OMEGA, RHO)
    wr = OMEGA * RHO
    for e in np.geomspace(1e-5, 0.2, 25):
        want = -e * e / (4.0 * wr) - math.log(e) - 0.5 * math.log(math.pi * wr)
        assert st.log_r(float(e)) == pytest.approx(want, rel=1e-13)


def test_moment_invariants_all_states():
    # every state must carry m1 = 1 and m2 = 2 omega rho: same mean
    # intensity, different fluctuations
    makers = (coherent_stats, fock_limit_stats, cat_limit_stats,
              thermal_stats, bsv_stats, mixed_diagonal_stats)
    for maker in makers:
        st = maker(OMEGA, RHO)
        m1, m2 = moments(st)
        assert m1 == pytest.approx(1.0, rel=1e-8), st.label
        assert m2 == pytest.approx(2.0 * OMEGA * RHO, rel=1e-8), st.label


def test_moments_against_direct_quadrature():
    # independent check of the t = sqrt(E) quadrature in moments():
    # straightforward quad in E with the endpoint split off by hand
    st = thermal_stats(OMEGA, RHO)
    wr = OMEGA * RHO

    def f1(e):
        return e * math.exp(-e * e / (2.0 * wr)) / wr

    ref, _ = quad(f1, 0.0, 40.0 * math.sqrt(wr), epsabs=1e-14, epsrel=1e-12)
    m1, _ = moments(st)
    assert m1 == pytest.approx(ref, rel=1e-10)


def test_mixed_diagonal_matches_bsv_pointwise():
    st_m = mixed_diagonal_stats(OMEGA, RHO)
    st_b = bsv_stats(OMEGA, RHO)
    grid = np.geomspace(1e-6 * math.sqrt(OMEGA * RHO),
                        10.0 * math.sqrt(OMEGA * RHO), 60)
    got = st_m.log_r(grid)
    want = st_b.log_r(grid)
    assert np.max(np.abs(got - want)) < 1e-8


def test_with_drive_rebuilds_family():
    st = thermal_stats(OMEGA, RHO)
    st2 = st.with_drive(2.0, 5.0 * RHO)
    assert st2.label == "thermal"
    assert (st2.omega, st2.rho) == (2.0, 5.0 * RHO)
    m1, m2 = moments(st2)
    assert m1 == pytest.approx(1.0, rel=1e-8)
    assert m2 == pytest.approx(2.0 * 2.0 * 5.0 * RHO, rel=1e-8)


def test_custom_table_is_rescaled_to_invariants():
    # a half-Gaussian sampled on an arbitrary abscissa with arbitrary
    # overall scale: the constructor must restore both invariants
    e = np.linspace(1e-4, 8.0, 400)
    r = 3.7e5 * np.exp(-((e - 2.0) ** 2) / 0.5)
    st = custom_tabulated_stats(OMEGA, RHO, np.column_stack([e, r]))
    assert st.label == "custom"
    m1, m2 = moments(st)
    assert m1 == pytest.approx(1.0, rel=1e-9)
    assert m2 == pytest.approx(2.0 * OMEGA * RHO, rel=1e-9)
    st2 = st.with_drive(OMEGA, 2.0 * RHO)
    m1b, m2b = moments(st2)
    assert m1b == pytest.approx(1.0, rel=1e-9)
    assert m2b == pytest.approx(4.0 * OMEGA * RHO, rel=1e-9)


def test_custom_table_validation():
    good_e = np.array([0.1, 0.2, 0.3])
    good_r = np.array([1.0, 2.0, 1.0])
    with pytest.raises(ValueError):
        custom_tabulated_stats(OMEGA, RHO, np.ones((3, 3)))
    with pytest.raises(ValueError):
        custom_tabulated_stats(OMEGA, RHO,
                               np.column_stack([good_e[::-1], good_r]))
    with pytest.raises(ValueError):
        custom_tabulated_stats(OMEGA, RHO,
                               np.column_stack([good_e, -good_r]))
    with pytest.raises(ValueError):   # interior zero breaks log interpolation
        custom_tabulated_stats(
            OMEGA, RHO,
            np.column_stack([np.array([0.1, 0.2, 0.3, 0.4]),
                             np.array([1.0, 0.0, 1.0, 1.0])]))
    with pytest.raises(NonNormalizable):
        custom_tabulated_stats(
            OMEGA, RHO, np.column_stack([good_e, np.zeros(3)]))


def test_tabulated_from_file(tmp_path):
    e = np.linspace(0.01, 5.0, 200)
    r = np.exp(-e)
    path = tmp_path / "table.txt"
    lines = ["# E R"] + [f"{a:.12e} {b:.12e}" for a, b in zip(e, r)]
    path.write_text("\n".join(lines) + "\n")
    st = tabulated_stats_from_file(path, OMEGA, RHO)
    m1, m2 = moments(st)
    assert m1 == pytest.approx(1.0, rel=1e-9)
    assert m2 == pytest.approx(2.0 * OMEGA * RHO, rel=1e-9)
    assert st.log_r(st.support_max * 1.01) == -np.inf


def test_drive_validation():
    with pytest.raises(ValueError):
        coherent_stats(0.0, RHO)
    with pytest.raises(ValueError):
        thermal_stats(OMEGA, 0.0)
    with pytest.raises(ValueError):
        bsv_stats(OMEGA, -1.0)
    # zero density is well-defined for atomic-peak states (free electron)
    assert coherent_stats(OMEGA, 0.0).peak_amplitude == 0.0


def test_hand_built_statistics_accepted():
    # consumers only rely on the documented surface: label, omega, rho,
    # log_r / peak_amplitude, support_max
    wr = OMEGA * RHO
    a = math.sqrt(2.0 * wr)
    sigma = 0.05 * a

    def log_r(e):
        return (-((e - a) ** 2) / (2.0 * sigma * sigma)
                - 0.5 * math.log(2.0 * math.pi * sigma * sigma) - np.log(e))

    st = PhaseAveragedStatistics(label="custom", omega=OMEGA, rho=RHO,
                                 log_r_fn=log_r, support_max=a + 40 * sigma)
    m1, m2 = moments(st)
    # exact Gaussian moments: int N(a, sigma) dE = 1, int E^2 N = a^2 + sigma^2
    assert m1 == pytest.approx(1.0, rel=1e-8)
    assert m2 == pytest.approx(a * a + sigma * sigma, rel=1e-8)
