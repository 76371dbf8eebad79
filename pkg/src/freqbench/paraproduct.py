"""Dyadic band projections and a quadratically coupled paraproduct.

Frequencies are split into dyadic annuli ``(2**(k-1), 2**k]`` (both signs)
and balls ``|xi| <= 2**k``.  The paraproduct pairs an annulus of the first
input at twice the depth with a ball of the second input: counting depth
``d`` downward from a band limit ``2**kbits``, the operator is

    sum_d  annulus[depth 2d](f) * ball[depth d](g),

so the surviving piece of ``f`` is always far finer than the ball of ``g``
it multiplies.  That scale gap is what drives the six-term telescoping
identity: the pairing against a third function splits into three forward
terms and three diagonal terms in which only adjacent annuli of the second
and third input interact.  The identity is exact on the mode lattice once
the diagonal depth ranges are started at the right offsets (two, one and
three below the coupling depth); starting all three one step down, as a
naive swap of summation order suggests, leaves a macroscopic defect that
:func:`telescoping_decompose` can also exhibit on request.

Square function and maximal martingale transform close the toolkit; both
act band-by-band on the same annuli.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import GridFunction

# diagonal depth offsets that make the telescoping identity lattice-exact,
# and the naive offsets obtained by swapping summation order carelessly
EXACT_OFFSETS = (2, 1, 3)
NAIVE_OFFSETS = (1, 1, 2)


def _abs_freqs(f: GridFunction) -> np.ndarray:
    return np.abs(f.freqs() / f.length)


def qk(f: GridFunction, k: int) -> GridFunction:
    """Annulus projection onto 2**(k-1) < |xi| <= 2**k."""
    a = _abs_freqs(f)
    band = (a > 2.0 ** (k - 1)) & (a <= 2.0 ** k)
    return f.multiply_spectrum(band.astype(float))


def pk(f: GridFunction, k: int) -> GridFunction:
    """Ball projection onto |xi| <= 2**k."""
    band = _abs_freqs(f) <= 2.0 ** k
    return f.multiply_spectrum(band.astype(float))


def mean_mode(f: GridFunction) -> GridFunction:
    """The zero-frequency component, as a constant function."""
    band = _abs_freqs(f) == 0.0
    return f.multiply_spectrum(band.astype(float))


def default_kbits(f: GridFunction) -> int:
    """Largest even band exponent whose doubled ball stays below Nyquist.

    Products of two functions from the ball then alias only at the very
    fold frequency, which no band-limited pairing can see.
    """
    k = int(math.floor(math.log2(f.size / (4.0 * f.length))))
    return k - (k % 2)


def _depth_range(kbits: int) -> range:
    return range(0, (kbits - 1) // 2 + 1)


def pp_apply(f: GridFunction, g: GridFunction,
             kbits: int | None = None) -> GridFunction:
    """Quadratically coupled paraproduct of two functions.

    Sums annulus[depth 2d](f) * ball[depth d](g) over all depths d >= 0
    for which the doubled depth still names a band inside the limit.
    """
    if kbits is None:
        kbits = default_kbits(f)
    out = GridFunction.zeros(f.size, f.length, f.origin)
    for d in _depth_range(kbits):
        piece = qk(f, kbits - 2 * d).values * pk(g, kbits - d).values
        out = out + GridFunction(piece, f.length, f.origin)
    return out


def square_function(psi: GridFunction, kmax: int | None = None) -> GridFunction:
    """Pointwise l2 aggregate of the annulus projections."""
    if kmax is None:
        kmax = int(math.ceil(math.log2(psi.size / (2.0 * psi.length))))
    acc = np.zeros(psi.size)
    for k in range(0, kmax + 1):
        acc += np.abs(qk(psi, k).values) ** 2
    return GridFunction(np.sqrt(acc).astype(complex), psi.length, psi.origin)


def max_martingale(a, psi: GridFunction,
                   kmax: int | None = None) -> GridFunction:
    """sup over l of |sum_{k > l} a_k * annulus_k(psi)|, pointwise.

    ``a`` is indexed by the band exponent k and must cover 0..kmax.
    """
    if kmax is None:
        kmax = int(math.ceil(math.log2(psi.size / (2.0 * psi.length))))
    coeffs = np.asarray(a, dtype=float)
    if coeffs.size < kmax + 1:
        raise ValueError("coefficient sequence shorter than the band range")
    acc = np.zeros(psi.size, dtype=complex)
    best = np.zeros(psi.size)
    for k in range(kmax, -1, -1):
        acc = acc + coeffs[k] * qk(psi, k).values
        np.maximum(best, np.abs(acc), out=best)
    return GridFunction(best.astype(complex), psi.length, psi.origin)


def _pairing(u: GridFunction, h: GridFunction) -> complex:
    return complex(np.sum(u.values * h.values) * u.dx)


def telescoping_decompose(f: GridFunction, g: GridFunction, h: GridFunction,
                          kbits: int | None = None,
                          offsets: tuple[int, int, int] = EXACT_OFFSETS,
                          ) -> dict:
    """Split the paraproduct pairing into its six telescoping terms.

    Inputs are projected onto the ball at the band limit first (flag
    ``truncated`` reports whether that changed anything).  Returns the
    three forward terms (full product, shallower-band swap of the second
    input, shallower-band swap of the third), the three diagonal terms
    (third-input annulus at the same, one-coarser and one-finer depth than
    the second's), the direct pairing, their difference ``residual``, and
    ``scale`` = product of the three l2 norms.  With the default offsets
    the residual is pure float roundoff; ``offsets=NAIVE_OFFSETS``
    reproduces the macroscopic defect of the careless range swap.
    """
    if kbits is None:
        kbits = default_kbits(f)

    def clip(u: GridFunction) -> tuple[GridFunction, bool]:
        v = pk(u, kbits)
        return v, bool(np.abs((u - v).values).max() > 1e-13)

    f0, tf = clip(f)
    g0, tg = clip(g)
    h0, th = clip(h)

    depths = _depth_range(kbits)
    df = [qk(f0, kbits - 2 * d).values for d in depths]
    dg = [qk(g0, kbits - e).values for e in range(kbits + 1)]
    dh = [qk(h0, kbits - e).values for e in range(kbits + 1)]
    dx = f0.dx

    # suffix sums of the doubled-depth annuli of f: fsum[m] = sum_{d >= m}
    zero = np.zeros(f0.size, dtype=complex)
    fsum = [zero] * (len(df) + 1)
    for d in range(len(df) - 1, -1, -1):
        fsum[d] = fsum[d + 1] + df[d]

    def fat(m: int) -> np.ndarray:
        return fsum[min(max(m, 0), len(df))] if m < len(df) else zero

    gv, hv = g0.values, h0.values
    t_full = complex(np.sum(fsum[0] * gv * hv) * dx)

    # prefix sums over depths of g and h
    gpre = np.cumsum([zero] + dg, axis=0)
    hpre = np.cumsum([zero] + dh, axis=0)
    t_swap_g = 0.0j
    t_swap_h = 0.0j
    for d in depths:
        t_swap_g -= complex(np.sum(df[d] * gpre[d] * hv) * dx)
        t_swap_h -= complex(np.sum(df[d] * hpre[max(d - 1, 0)] * gv) * dx)

    o_same, o_down, o_up = offsets
    t_same = 0.0j
    t_down = 0.0j
    t_up = 0.0j
    for el in range(kbits + 1):
        t_same += complex(np.sum(dg[el] * dh[el] * fat(el + o_same)) * dx)
        if el >= 1:
            t_down += complex(np.sum(dg[el] * dh[el - 1] * fat(el + o_down)) * dx)
        if el + 1 <= kbits:
            t_up += complex(np.sum(dg[el] * dh[el + 1] * fat(el + o_up)) * dx)

    pairing = _pairing(pp_apply(f0, g0, kbits), h0)
    total = t_full + t_swap_g + t_swap_h + t_same + t_down + t_up
    return {
        "forward": t_full,
        "swap_g": t_swap_g,
        "swap_h": t_swap_h,
        "diag_same": t_same,
        "diag_down": t_down,
        "diag_up": t_up,
        "pairing": pairing,
        "residual": abs(pairing - total),
        "scale": f0.norm() * g0.norm() * h0.norm(),
        "truncated": tf or tg or th,
    }
