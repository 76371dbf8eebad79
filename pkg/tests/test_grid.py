"""Grid substrate: spectra, norms, exact maximal averages, kernels."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freqbench.grid import (
    GridFunction,
    PlateauBump,
    PositiveBandKernel,
    convolve,
    indicator,
    maximal_average,
    smooth_indicator,
    smooth_ramp,
)


def random_gridfunction(rng, size=128, length=1.0, origin=0.0):
    vals = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return GridFunction(vals, length=length, origin=origin)


class TestSpectrum:
    def test_roundtrip(self):
        rng = np.random.default_rng(7)
        f = random_gridfunction(rng)
        g = GridFunction.from_spectrum(f.spectrum(), f.length, f.origin)
        assert np.abs(g.values - f.values).max() < 1e-12

    def test_single_mode(self):
        # coefficient at k=3 is exp(2 pi i 3 x), independent of origin
        n = 64
        for origin in (0.0, -4.0):
            c = np.zeros(n, dtype=complex)
            c[n // 2 + 3] = 1.0
            f = GridFunction.from_spectrum(c, length=1.0, origin=origin)
            xs = f.x
            assert np.abs(f.values - np.exp(2j * np.pi * 3 * xs)).max() < 1e-12

    def test_parseval(self):
        rng = np.random.default_rng(11)
        f = random_gridfunction(rng, size=256, length=8.0, origin=-4.0)
        lhs = f.norm(2) ** 2
        rhs = f.length * np.sum(np.abs(f.spectrum()) ** 2)
        assert abs(lhs - rhs) < 1e-10 * max(lhs, 1.0)

    def test_modulate_shifts_spectrum(self):
        rng = np.random.default_rng(3)
        base = np.zeros(64, dtype=complex)
        base[20:40] = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        f = GridFunction.from_spectrum(base, length=2.0)
        g = f.modulate(5)
        expect = f.values * np.exp(2j * np.pi * 5 * f.x / f.length)
        assert np.abs(g.values - expect).max() < 1e-12
        assert np.abs(g.spectrum()[25:45] - base[20:40]).max() < 1e-12

    def test_modulate_overflow_raises(self):
        c = np.zeros(32, dtype=complex)
        c[-1] = 1.0  # top of band
        f = GridFunction.from_spectrum(c)
        with pytest.raises(ValueError):
            f.modulate(1)

    def test_refine_preserves_band_limited(self):
        rng = np.random.default_rng(5)
        c = np.zeros(64, dtype=complex)
        c[24:40] = rng.standard_normal(16)
        f = GridFunction.from_spectrum(c, length=1.0)
        g = f.refine(2)
        assert g.size == 128
        assert abs(g.norm(2) - f.norm(2)) < 1e-12
        # samples of g at even indices are samples of f
        assert np.abs(g.values[::2] - f.values).max() < 1e-11

    @given(st.integers(min_value=-10, max_value=10))
    @settings(max_examples=20, deadline=None)
    def test_modulate_unimodular_invariance(self, k):
        rng = np.random.default_rng(17)
        c = np.zeros(64, dtype=complex)
        c[22:42] = rng.standard_normal(20)
        f = GridFunction.from_spectrum(c)
        assert abs(f.modulate(k).norm(2) - f.norm(2)) < 1e-12


class TestNorms:
    def test_indicator_mass_exact(self):
        # half-open indicator with lattice endpoints has exact mass
        f = indicator((0.0, 1.0), 256, length=8.0, origin=-4.0)
        assert f.integral() == 1.0
        assert f.norm(1) == 1.0

    def test_lp_interpolation_bound(self):
        rng = np.random.default_rng(23)
        f = random_gridfunction(rng, size=128)
        # ||f||_2 <= ||f||_1^(1/2) ||f||_inf^(1/2) on a probability space
        assert f.norm(2) <= np.sqrt(f.norm(1) * f.norm(np.inf)) + 1e-12

    def test_inner_matches_norm(self):
        rng = np.random.default_rng(29)
        f = random_gridfunction(rng)
        assert abs(f.inner(f).real - f.norm(2) ** 2) < 1e-12


class TestMaximalAverage:
    def test_indicator_value_two_units_right(self):
        # mass-1 indicator on [0,1); at x=2 the best closed interval is
        # [0,2]: average exactly 1/2
        f = indicator((0.0, 1.0), 256, length=8.0, origin=-4.0)
        m = maximal_average(f)
        x = f.x
        idx = int(np.argmin(np.abs(x - 2.0)))
        assert x[idx] == 2.0
        assert m.values[idx].real == 0.5

    def test_power_variant(self):
        # p=2 at the same point: sqrt(1/2)
        f = indicator((0.0, 1.0), 256, length=8.0, origin=-4.0)
        m = maximal_average(f, p=2.0)
        idx = int(np.argmin(np.abs(f.x - 2.0)))
        assert abs(m.values[idx].real - np.sqrt(0.5)) < 1e-12

    def test_dominates_function(self):
        rng = np.random.default_rng(31)
        f = random_gridfunction(rng, size=128)
        m = maximal_average(f)
        assert np.all(m.values.real >= np.abs(f.values) - 1e-12)

    def test_monotone_in_p(self):
        rng = np.random.default_rng(37)
        f = random_gridfunction(rng, size=64)
        m1 = maximal_average(f, p=1.0).values.real
        m2 = maximal_average(f, p=2.0).values.real
        assert np.all(m2 >= m1 - 1e-10)

    def test_doubling_infimum(self):
        # inf over I of the maximal average is controlled by the inf over
        # the 4^l-dilate, up to 8^l, when the dilate stays in the domain
        rng = np.random.default_rng(41)
        vals = np.abs(rng.standard_normal(256)) + 0.05
        f = GridFunction(vals.astype(complex), length=8.0, origin=-4.0)
        m = maximal_average(f).values.real
        x = f.x
        for l in (1, 2):
            base = (x >= -0.25) & (x < 0.25)
            big = (x >= -0.25 * 4**l) & (x < 0.25 * 4**l)
            assert m[base].min() <= 8.0**l * m[big].min() + 1e-9


class TestBumps:
    def test_ramp_endpoints(self):
        u = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
        r = smooth_ramp(u)
        assert r[0] == 0.0 and r[1] == 0.0
        assert r[3] == 1.0 and r[4] == 1.0
        assert 0.0 < r[2] < 1.0

    def test_plateau_support_and_core(self):
        b = PlateauBump(support=(-1.0, 1.0), flat=(-0.5, 0.5))
        xs = np.linspace(-2, 2, 401)
        v = b(xs)
        assert np.all(v[np.abs(xs) >= 1.0] == 0.0)
        assert np.all(v[np.abs(xs) <= 0.5] == 1.0)
        assert np.all((v >= 0.0) & (v <= 1.0))

    def test_derivative_bounds_finite(self):
        b = PlateauBump(support=(0.0, 4.0), flat=(1.0, 3.0))
        consts = b.derivative_bounds(orders=(0, 1, 2))
        assert consts[0] == 1.0
        assert 0 < consts[1] < 50.0
        assert 0 < consts[2] < 2000.0


class TestPositiveKernel:
    def test_positive_and_band_limited(self):
        k = PositiveBandKernel(size=512, length=1.0, width=1 / 16, half_power=8)
        assert k.values.min() > 0.0
        assert k.spectrum_radius <= 8 * 16

    def test_mass_one(self):
        k = PositiveBandKernel(size=512, length=1.0, width=1 / 16, half_power=8)
        assert abs(k.values.sum() * (1.0 / 512) - 1.0) < 1e-12

    def test_alias_refused(self):
        with pytest.raises(ValueError):
            PositiveBandKernel(size=64, length=1.0, width=1 / 16, half_power=8)

    def test_envelope_two_sided_on_window(self):
        k = PositiveBandKernel(size=1024, length=1.0, width=1 / 32, half_power=4)
        lo, hi = k.envelope_constants(window_widths=12.0)
        assert 0.0 < lo < 1.0 < hi < 10.0

    def test_partition_of_unity_exact(self):
        # smoothing a partition by indicators gives the constant 1; decay
        # power kept low so the far tails stay above float roundoff
        k = PositiveBandKernel(size=512, length=1.0, width=1 / 32, half_power=2)
        cuts = np.linspace(0.0, 1.0, 9)
        parts = [
            smooth_indicator((a, b), k)
            for a, b in zip(cuts[:-1], cuts[1:])
        ]
        total = parts[0]
        for p in parts[1:]:
            total = total + p
        assert np.abs(total.values - 1.0).max() < 1e-9
        for p in parts:
            assert p.values.real.min() > 0.0

    def test_convolution_preserves_mass(self):
        k = PositiveBandKernel(size=512, length=1.0, width=1 / 32, half_power=6)
        f = indicator((0.25, 0.5), 512, 1.0)
        g = convolve(f, k)
        assert abs(g.integral().real - 0.25) < 1e-12
