"""Bilinear frequency multipliers on the periodic grid.

An operator here takes two :class:`~freqbench.grid.GridFunction` inputs
and produces a third by weighting every pair of input modes with a
symbol value and depositing the product at the sum frequency:

    out_hat(k) = sum over ki + kj = k of  m(ki, kj) f_hat(ki) g_hat(kj).

Symbols are vectorized callables ``m(ki, kj)`` on integer frequency
meshes.  The module provides the constant symbol (pointwise product),
half-plane sign symbols (directional two-input Hilbert transforms), a
principal-value quadrature twin used as an independent cross-check, and
cutoffs to a planar region such as the lacunary polygon.

Sum frequencies that fall outside the representable band wrap modulo the
grid size, exactly as the discrete convolution theorem dictates; every
apply reports how much coefficient mass wrapped so band-limited
experiments can insist on none.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridFunction

__all__ = [
    "AliasReport",
    "bilinear_apply",
    "unit_symbol",
    "halfplane_sign_symbol",
    "directional_hilbert",
    "pv_cotangent_symbol",
    "pv_quadrature_hilbert",
    "region_symbol",
    "polygon_multiplier",
    "trilinear_form",
]


@dataclass(frozen=True)
class AliasReport:
    """Accounting of coefficient mass moved by one bilinear apply."""

    in_band_mass: float
    wrapped_mass: float
    pairs: int

    @property
    def clean(self) -> bool:
        return self.wrapped_mass == 0.0


def bilinear_apply(f: GridFunction, g: GridFunction, symbol,
                   mode_floor: float = 0.0):
    """Apply the bilinear multiplier ``symbol`` to the pair (f, g).

    ``symbol`` is a callable taking two integer arrays (broadcast mesh of
    input frequencies) and returning the symbol values.  Modes with
    coefficient modulus <= ``mode_floor`` are skipped, which makes
    band-limited inputs cheap without changing dense ones (the default
    floor drops exact zeros only).

    Returns ``(out, report)`` where ``out`` is a GridFunction on the same
    grid and ``report`` an :class:`AliasReport`.  Output frequencies
    beyond the band wrap modulo the grid size and their mass is tallied
    in the report.
    """
    if not f.same_grid(g):
        raise ValueError("grid mismatch")
    n = f.size
    ks = f.freqs()
    cf, cg = f.spectrum(), g.spectrum()
    ia = np.nonzero(np.abs(cf) > mode_floor)[0]
    ja = np.nonzero(np.abs(cg) > mode_floor)[0]
    out = np.zeros(n, dtype=complex)
    if ia.size == 0 or ja.size == 0:
        return (GridFunction.from_spectrum(out, f.length, f.origin),
                AliasReport(0.0, 0.0, 0))
    ki = ks[ia][:, None]
    kj = ks[ja][None, :]
    prod = (cf[ia][:, None] * cg[ja][None, :]) * symbol(ki, kj)
    ksum = ki + kj
    lo = -(n // 2)
    wrapped = (ksum < lo) | (ksum >= lo + n)
    pos = (ksum - lo) % n
    out = (np.bincount(pos.ravel(), weights=prod.real.ravel(), minlength=n)
           + 1j * np.bincount(pos.ravel(), weights=prod.imag.ravel(),
                              minlength=n))
    absprod = np.abs(prod)
    wrapped_mass = float(absprod[wrapped].sum())
    in_band = float(absprod.sum() - wrapped_mass)
    report = AliasReport(in_band, wrapped_mass, int(prod.size))
    return GridFunction.from_spectrum(out, f.length, f.origin), report


def unit_symbol(ki, kj):
    """Constant symbol 1: the operator is the pointwise product."""
    return np.ones(np.broadcast(ki, kj).shape)


def halfplane_sign_symbol(slope):
    """i*pi*sign(slope*ki - kj): jump across the line kj = slope*ki.

    The zero set of the sign (the line itself) genuinely maps to 0, so
    mode pairs sitting on the line are annihilated.
    """
    def m(ki, kj):
        return 1j * np.pi * np.sign(slope * ki - kj)
    return m


def directional_hilbert(f, g, slope):
    """Two-input Hilbert transform along direction ``slope``."""
    return bilinear_apply(f, g, halfplane_sign_symbol(slope))


def pv_cotangent_symbol(slope, nodes: int = 200_000):
    """Quadrature twin of :func:`halfplane_sign_symbol`.

    Time-domain form of the same operator: a principal-value integral of
    f(x + slope*t) g(x - t) against the periodized kernel pi*cot(pi*t),
    discretized on ``nodes`` symmetric midpoints of one period.  Its
    value at a mode pair depends only on theta = slope*ki - kj:

        S(theta) = (2i/nodes) * sum_j pi*cot(pi t_j) sin(2 pi theta t_j)

    For integer theta with theta mod nodes != 0 this equals
    i*pi*sign(theta) exactly (the integrand is a trig polynomial of
    degree |theta|, integrated exactly by the midpoint rule), so at
    integer slopes the twin certifies the sign symbol to roundoff.  At
    non-integer theta it converges to the periodized kernel's own
    symbol, which differs from the sign at order 1e-3; integer-slope
    use only is certified.  Shares no code with the sign symbol.
    """
    half = nodes // 2
    t = (np.arange(half) + 0.5) / nodes
    w = (2.0 / nodes) * np.pi / np.tan(np.pi * t)

    def m(ki, kj):
        theta = slope * ki - kj
        uniq, inv = np.unique(theta, return_inverse=True)
        vals = np.empty(uniq.size, dtype=complex)
        # chunked outer product: uniq can reach ~1e3, nodes ~2e5
        for a in range(0, uniq.size, 64):
            b = min(a + 64, uniq.size)
            s = np.sin(2.0 * np.pi * uniq[a:b, None] * t[None, :])
            vals[a:b] = 1j * (s @ w)
        return vals[inv].reshape(np.broadcast(ki, kj).shape)

    return m


def pv_quadrature_hilbert(f, g, slope, nodes: int = 200_000):
    """Directional Hilbert transform via the quadrature symbol."""
    return bilinear_apply(f, g, pv_cotangent_symbol(slope, nodes))


def region_symbol(contains, size, scale: float = 4.0):
    """Indicator symbol of a planar region.

    ``contains`` maps an (n, 2) point array to booleans.  Integer mode
    pairs land at (scale*ki/size, scale*kj/size), so the open unit disk
    around the origin corresponds to the middle half-band of the grid.
    """
    def m(ki, kj):
        sh = np.broadcast(ki, kj).shape
        bki = np.broadcast_to(ki, sh).ravel()
        bkj = np.broadcast_to(kj, sh).ravel()
        pts = np.stack([bki * (scale / size), bkj * (scale / size)], axis=1)
        return contains(pts).astype(float).reshape(sh)
    return m


def polygon_multiplier(f, g, polygon, scale: float = 4.0):
    """Cut the mode-pair plane to ``polygon`` (anything with .contains)."""
    return bilinear_apply(f, g, region_symbol(polygon.contains, f.size, scale))


def trilinear_form(f, g, h, symbol):
    """integral of T(f, g) * h over the period (no conjugation).

    Returns ``(value, report)`` with the alias report of the inner apply.
    """
    out, report = bilinear_apply(f, g, symbol)
    return complex((out * h).integral()), report
