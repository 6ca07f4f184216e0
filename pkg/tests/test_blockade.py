import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rydberg_sps.blockade import (
    PAIR_FORMULAS,
    blockade_report,
    ladder_model,
    ladder_oracle,
    pair_double_excitation_eq7,
    pair_double_excitation_eq8,
    pair_indices,
    pair_interaction,
)
from rydberg_sps.exciton import CrystalGeometry, DriveConfig, ExcitonLevel, MaterialConstants, radiative_linewidth

LEVEL = ExcitonLevel()
DRIVE = DriveConfig(rabi_single=9.0, purcell=2.0)
GAMMA = radiative_linewidth(24, purcell=2.0)


def pair_two_level_steady(omega, n, gamma, v, rho11):
    """Stationary (rho22, rho12, rho21) of the driven 1-2 pair with rho11 held fixed.

    d rho22/dt = -gamma rho22 - i g (rho12 - rho21)
    d rho12/dt = -(gamma/2 - i v) rho12 - i g (rho22 - rho11)
    """
    g = omega / (2 * math.sqrt(n))
    a = np.array(
        [
            [-gamma, -1j * g, 1j * g],
            [-1j * g, -(gamma / 2 - 1j * v), 0],
            [1j * g, 0, -(gamma / 2 + 1j * v)],
        ]
    )
    b = np.array([0, -1j * g * rho11, 1j * g * rho11])
    return np.linalg.solve(a, b)


class TestPairInteraction:
    def test_values(self):
        assert pair_interaction(2.0, 328.5) == pytest.approx(41.0625)
        assert pair_interaction(2.0, 328.5) == pytest.approx(41.1, abs=0.05)
        assert pair_interaction(4.0, 328.5) == pytest.approx(pair_interaction(2.0, 328.5) / 8)
        assert pair_interaction(1.0, 1.0) == 1.0

    def test_vectorised(self):
        assert np.allclose(pair_interaction(np.array([1.0, 2.0]), 8.0), [8.0, 1.0])

    @pytest.mark.parametrize("r", [0.0, -1.0])
    def test_rejects_non_positive(self, r):
        with pytest.raises(ValueError):
            pair_interaction(r, 1.0)


class TestPairFormulas:
    def test_eq8_example(self):
        x, y = 8 * 81 / 4.05**2, (81 / 8) / (41.1**2 + 4.05**2 / 4)
        exact = x / (1 + 2 * x) * y / (1 + 2 * y)
        value = pair_double_excitation_eq8(9.0, 8, 4.05, 41.1)
        assert value == pytest.approx(exact, rel=1e-14)
        assert value == pytest.approx(2.9e-3, rel=0.02)

    def test_eq7_is_quarter_at_small_y(self):
        e8 = pair_double_excitation_eq8(9.0, 8, 4.05, 41.1)
        e7 = pair_double_excitation_eq7(9.0, 8, 4.05, 41.1)
        assert e7 / e8 == pytest.approx(0.25, rel=0.02)

    @pytest.mark.parametrize("fn", list(PAIR_FORMULAS.values()))
    def test_limits(self, fn):
        assert fn(0.0, 8, 4.05, 41.1) == 0.0
        assert fn(9.0, 8, 4.05, 1e12) < 1e-20

    @pytest.mark.parametrize("omega, n, v", [(9.0, 8, 41.1), (1.0, 2, 0.0), (3.0, 27, 5.0), (20.0, 8, 1.0)])
    def test_eq7_solves_pair_equations(self, omega, n, v):
        gamma = 4.05
        x = n * omega**2 / gamma**2
        rho11 = x / (1 + 2 * x)
        rho22, rho12, rho21 = pair_two_level_steady(omega, n, gamma, v, rho11)
        assert abs(rho22.imag) < 1e-15
        assert rho12 == pytest.approx(np.conj(rho21))
        assert pair_double_excitation_eq7(omega, n, gamma, v) == pytest.approx(rho22.real, rel=1e-12)

    @given(st.floats(0, 1e3), st.floats(0.01, 1e3))
    def test_variant_ratio(self, v, omega):
        e8 = pair_double_excitation_eq8(omega, 8, 4.05, v)
        e7 = pair_double_excitation_eq7(omega, 8, 4.05, v)
        if e7 == 0:
            return
        y = (omega**2 / 8) / (v**2 + 4.05**2 / 4)
        assert e8 / e7 == pytest.approx((4 + y) / (1 + 2 * y), rel=1e-9)
        assert e8 / e7 <= 4 * (1 + 1e-12)

    @pytest.mark.parametrize("fn", list(PAIR_FORMULAS.values()))
    @given(v=st.floats(0, 500), omega=st.floats(0.01, 50), n=st.integers(2, 64))
    def test_monotone(self, fn, v, omega, n):
        base = fn(omega, n, 4.05, v)
        assert 0.0 <= base <= 1.0
        assert fn(omega, n, 4.05, v * 1.1 + 0.1) <= base
        assert fn(omega * 1.1, n, 4.05, v) >= base

    def test_two_independent_emitters(self):
        # N = 2, V = 0: X == Y, so P_rr = rho_ee**2 and g2(0) = rho_ee / 2 <= 1/4
        for omega in (0.1, 1.0, 10.0, 1e3):
            gamma, n = 1.0, 2
            x = n * omega**2 / gamma**2
            rho_ee = x / (1 + 2 * x)
            p_rr = pair_double_excitation_eq8(omega, n, gamma, 0.0)
            assert p_rr == pytest.approx(rho_ee**2, rel=1e-12)
            g2 = 0.5 * p_rr / rho_ee
            assert g2 == pytest.approx(0.5 * rho_ee, rel=1e-12)
            assert 0.5 - g2 >= 0.25 - 1e-12


class TestLadderOracle:
    def test_model_structure(self):
        m = ladder_model(2.0, 4, 1.0, 3.0)
        assert m.hamiltonian[0, 1] == pytest.approx(2.0)
        assert m.hamiltonian[1, 2] == pytest.approx(0.5)
        assert m.hamiltonian[2, 2] == 3.0
        assert [r for _, r in m.jumps] == [1.0, 1.0]

    def test_large_shift_suppressed(self):
        assert ladder_oracle(9.0, 8, GAMMA, 1e3 * GAMMA) < 1e-4

    def test_no_drive(self):
        assert ladder_oracle(0.0, 8, GAMMA, 10.0) == pytest.approx(0.0, abs=1e-15)

    def test_eq7_within_valid_domain(self):
        # relative agreement holds either far from resonance or at weak single-exciton drive
        gamma = 1.0
        for n in (2, 8, 27):
            for v in (3.0, 5.0, 10.0, 100.0):
                for x in (0.01, 0.1, 0.3, 0.49):
                    omega = gamma * math.sqrt(x / n)
                    ref = ladder_oracle(omega, n, gamma, v)
                    if 1e-10 < ref < 1e-2:
                        assert pair_double_excitation_eq7(omega, n, gamma, v) == pytest.approx(ref, rel=0.05)
            for v in (0.0, 0.5, 1.0, 2.0):
                for x in (0.01, 0.05, 0.15):
                    omega = gamma * math.sqrt(x / n)
                    ref = ladder_oracle(omega, n, gamma, v)
                    if 1e-10 < ref < 1e-2:
                        assert pair_double_excitation_eq7(omega, n, gamma, v) == pytest.approx(ref, rel=0.10)

    def test_eq7_deviation_grows_with_x_near_resonance(self):
        gamma, n = 1.0, 8
        devs = []
        for x in (0.05, 0.2, 0.45):
            omega = gamma * math.sqrt(x / n)
            ref = ladder_oracle(omega, n, gamma, 0.0)
            devs.append(abs(pair_double_excitation_eq7(omega, n, gamma, 0.0) / ref - 1))
        assert devs == sorted(devs)


@pytest.fixture(scope="module")
def report():
    return blockade_report(CrystalGeometry(side=4.0), LEVEL, DRIVE)


class TestReport:
    def test_operating_point(self, report):
        assert report.n_sites == 8
        assert report.collective_rabi == pytest.approx(25.456, abs=1e-3)
        assert report.ratio == pytest.approx(6.284, abs=1e-3)
        assert report.rate == pytest.approx(2.0, rel=0.05)

    def test_invariants(self, report):
        assert report.p_rr == math.fsum(report.pair_rho2)
        assert report.g2_zero == 0.5 * report.p_rr / report.rho_ee
        assert report.rate == report.rho_ee * report.gamma
        assert len(report.pair_terms) == 8 * 7 // 2
        assert all(t.distance > 0 and 0 <= t.rho2 <= 1 for t in report.pair_terms)
        keys = [(t.site_i, t.site_j) for t in report.pair_terms]
        assert keys == sorted(keys)
        assert all(i < j for i, j in keys)

    def test_reproducible(self, report):
        again = blockade_report(CrystalGeometry(side=4.0), LEVEL, DRIVE)
        assert again.p_rr == report.p_rr
        assert np.array_equal(again.pair_rho2, report.pair_rho2)

    def test_pair_indices(self):
        idx = pair_indices(4)
        assert idx.tolist() == [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]

    def test_variants_and_c3_override(self):
        e8 = blockade_report(CrystalGeometry(side=4.0), LEVEL, DRIVE, variant="eq8", c3=328.5)
        e7 = blockade_report(CrystalGeometry(side=4.0), LEVEL, DRIVE, variant="eq7", c3=328.5)
        assert e7.p_rr < e8.p_rr
        assert e8.pair_shift.max() == pytest.approx(328.5 / (2 * 0.9493) ** 3)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            blockade_report(CrystalGeometry(), LEVEL, DRIVE, variant="eq9")

    def test_single_site(self):
        res = blockade_report(CrystalGeometry(side=1.5), LEVEL, DRIVE)
        assert res.n_sites == 1
        assert res.p_rr == 0.0 and res.g2_zero == 0.0
        assert res.pair_terms == []

    def test_no_drive(self):
        res = blockade_report(CrystalGeometry(), LEVEL, DriveConfig(rabi_single=0.0))
        assert res.p_rr == 0.0
        assert math.isnan(res.g2_zero)

    def test_detuned_rejected(self):
        with pytest.raises(ValueError, match="resonant"):
            blockade_report(CrystalGeometry(), LEVEL, DriveConfig(rabi_single=9.0, detuning=1.0))

    def test_removing_a_site_never_increases_p_rr(self, report):
        for k in range(report.n_sites):
            keep = [(i != k and j != k) for i, j in report.pair_index]
            assert math.fsum(report.pair_rho2[keep]) <= report.p_rr

    @pytest.mark.parametrize("variant", ["eq8", "eq7"])
    def test_larger_crystal_at_equal_ratio(self, variant):
        omega_c = 9.0 * math.sqrt(8)
        small = blockade_report(CrystalGeometry(side=4.0), LEVEL, DRIVE, variant=variant)
        big = blockade_report(
            CrystalGeometry(side=6.0), LEVEL, DriveConfig(rabi_single=omega_c / math.sqrt(27), purcell=2.0), variant=variant
        )
        assert big.n_sites == 27
        assert big.ratio == pytest.approx(small.ratio, rel=1e-12)
        assert big.p_rr > small.p_rr
        assert big.g2_zero > small.g2_zero

    def test_material_passthrough(self):
        mat = MaterialConstants(blockade_coeff=6e-7)
        weak = blockade_report(CrystalGeometry(), LEVEL, DRIVE)
        strong = blockade_report(CrystalGeometry(), LEVEL, DRIVE, mat)
        assert strong.p_rr < weak.p_rr
