"""Periodic sampled functions with exact spectral bookkeeping.

Everything downstream runs on a uniformly sampled periodic interval:
complex samples, a centered integer spectrum, and a small set of discrete
operators whose exactness the rest of the package leans on.  The design
rule here is that any statement a test wants to make "exactly" (mass of an
indicator, a shifted spectrum, a partition of unity summing to one) must
be exact in floating point, not merely accurate, so endpoints and widths
are kept on binary-friendly lattices by the callers.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "GridFunction",
    "indicator",
    "maximal_average",
    "smooth_ramp",
    "PlateauBump",
    "PositiveBandKernel",
    "convolve",
    "smooth_indicator",
]


class GridFunction:
    """Complex function on a periodic interval, known by its samples.

    The domain is [origin, origin + length), sampled at ``size`` equally
    spaced points.  The spectrum is indexed by integer frequencies
    k in [-size/2, size/2); coefficient c_k multiplies
    exp(2*pi*i*k*x/length) with x the absolute coordinate, so shifting the
    origin never silently re-phases coefficients.
    """

    __slots__ = ("values", "length", "origin", "_spec")

    def __init__(self, values, length=1.0, origin=0.0):
        vals = np.asarray(values, dtype=complex)
        if vals.ndim != 1 or vals.size % 2:
            raise ValueError("need a 1-d sample array of even length")
        self.values = vals
        self.length = float(length)
        self.origin = float(origin)
        self._spec = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_spectrum(cls, coeffs, length=1.0, origin=0.0):
        """Build from centered coefficients aligned with ``freqs()``."""
        c = np.asarray(coeffs, dtype=complex)
        n = c.size
        ks = np.arange(-(n // 2), n // 2)
        # undo the absolute-coordinate phase, then inverse FFT
        b = c * np.exp(2j * np.pi * ks * (origin / length))
        vals = np.fft.ifft(np.fft.ifftshift(b)) * n
        out = cls(vals, length=length, origin=origin)
        out._spec = c.copy()
        return out

    @classmethod
    def zeros(cls, size, length=1.0, origin=0.0):
        return cls(np.zeros(size, dtype=complex), length=length, origin=origin)

    # -- basic geometry ---------------------------------------------------

    @property
    def size(self):
        return self.values.size

    @property
    def dx(self):
        return self.length / self.values.size

    @property
    def x(self):
        """Sample points (absolute coordinates)."""
        return self.origin + np.arange(self.size) * self.dx

    def freqs(self):
        n = self.size
        return np.arange(-(n // 2), n // 2)

    def same_grid(self, other):
        return (
            self.size == other.size
            and self.length == other.length
            and self.origin == other.origin
        )

    # -- spectrum ---------------------------------------------------------

    def spectrum(self):
        """Centered coefficients, aligned with ``freqs()``.  Cached."""
        if self._spec is None:
            b = np.fft.fftshift(np.fft.fft(self.values)) / self.size
            ks = self.freqs()
            self._spec = b * np.exp(-2j * np.pi * ks * (self.origin / self.length))
        return self._spec

    def modulate(self, shift):
        """Multiply by exp(2*pi*i*shift*x/length); spectrum moves up by ``shift``.

        Raises if any coefficient with modulus above ``1e-14 * max`` would
        leave the frequency band: modulation never wraps silently.
        """
        shift = int(shift)
        c = self.spectrum()
        n = self.size
        out = np.zeros(n, dtype=complex)
        if shift >= 0:
            kept = c[: n - shift] if shift else c
            dropped = c[n - shift:] if shift else c[:0]
            out[shift:] = kept
        else:
            kept = c[-shift:]
            dropped = c[:-shift]
            out[: n + shift] = kept
        floor = 1e-14 * max(np.abs(c).max(), 1e-300)
        if dropped.size and np.abs(dropped).max() > floor:
            raise ValueError(
                "modulation by %d pushes %.3e of coefficient mass out of band"
                % (shift, float(np.abs(dropped).max()))
            )
        return GridFunction.from_spectrum(out, self.length, self.origin)

    def multiply_spectrum(self, window):
        """Pointwise spectral multiplier; ``window`` is an array over
        ``freqs()`` or a callable evaluated there."""
        ks = self.freqs()
        w = window(ks) if callable(window) else np.asarray(window)
        if w.shape != ks.shape:
            raise ValueError("window shape mismatch")
        return GridFunction.from_spectrum(self.spectrum() * w, self.length, self.origin)

    def refine(self, factor=2):
        """Same function on a grid ``factor`` times finer (spectrum zero-pad)."""
        if factor < 1 or int(factor) != factor:
            raise ValueError("factor must be a positive integer")
        n, m = self.size, self.size * int(factor)
        big = np.zeros(m, dtype=complex)
        big[(m - n) // 2 : (m + n) // 2] = self.spectrum()
        return GridFunction.from_spectrum(big, self.length, self.origin)

    # -- integrals and norms ----------------------------------------------

    def integral(self):
        return self.values.sum() * self.dx

    def inner(self, other):
        """L2 pairing, conjugate-linear in ``other``."""
        if not self.same_grid(other):
            raise ValueError("grid mismatch")
        return (self.values * np.conj(other.values)).sum() * self.dx

    def norm(self, p=2):
        a = np.abs(self.values)
        if np.isinf(p):
            return float(a.max())
        return float((np.sum(a**p) * self.dx) ** (1.0 / p))

    # -- arithmetic --------------------------------------------------------

    def _binop(self, other, op):
        if isinstance(other, GridFunction):
            if not self.same_grid(other):
                raise ValueError("grid mismatch")
            return GridFunction(op(self.values, other.values), self.length, self.origin)
        return GridFunction(op(self.values, other), self.length, self.origin)

    def __add__(self, other):
        return self._binop(other, np.add)

    def __radd__(self, other):
        return self._binop(other, np.add)

    def __sub__(self, other):
        return self._binop(other, np.subtract)

    def __rsub__(self, other):
        return self._binop(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binop(other, np.multiply)

    def __rmul__(self, other):
        return self._binop(other, np.multiply)

    def __truediv__(self, other):
        return self._binop(other, np.divide)

    def __neg__(self):
        return GridFunction(-self.values, self.length, self.origin)

    def conj(self):
        return GridFunction(np.conj(self.values), self.length, self.origin)

    def abs(self):
        return GridFunction(np.abs(self.values), self.length, self.origin)

    def __repr__(self):
        return "GridFunction(size=%d, length=%g, origin=%g)" % (
            self.size,
            self.length,
            self.origin,
        )


def indicator(intervals, size, length=1.0, origin=0.0):
    """Indicator of a union of half-open intervals [a, b), sampled.

    Half-open on purpose: with endpoints on the sample lattice the grid
    mass of [a, b) is exactly b - a.
    """
    if not hasattr(intervals[0], "__len__"):
        intervals = [intervals]
    g = GridFunction.zeros(size, length=length, origin=origin)
    xs = g.x
    mask = np.zeros(size, dtype=bool)
    for a, b in intervals:
        mask |= (xs >= a) & (xs < b)
    g.values[mask] = 1.0
    return g


def maximal_average(f, p=1.0):
    """Exact running maximum of |f|^p averages, to the power 1/p.

    At each sample point x the value is the supremum of
    (1/|I|) * integral_I |f|^p over all closed intervals I = [x_a, x_b]
    with endpoints on the sample lattice, x_a <= x <= x_b, within the
    domain (no wraparound).  Exact over that family in O(size^2):
    for each left endpoint the averages to all right endpoints are a
    single vector, and a reversed running maximum distributes each
    suffix-sup to the points the intervals cover.
    """
    n = f.size
    dx = f.dx
    a = np.abs(f.values) ** p
    prefix = np.concatenate([[0.0], np.cumsum(a)]) * dx
    out = np.zeros(n)
    for i0 in range(n):
        widths = (np.arange(i0 + 1, n + 1) - i0) * dx
        avgs = (prefix[i0 + 1 :] - prefix[i0]) / widths
        run = np.maximum.accumulate(avgs[::-1])[::-1]
        if run[0] > out[i0]:
            out[i0] = run[0]
        if i0 + 1 < n:
            np.maximum(out[i0 + 1 :], run[: n - 1 - i0], out=out[i0 + 1 :])
    if p != 1.0:
        out **= 1.0 / p
    return GridFunction(out.astype(complex), f.length, f.origin)


# -- smooth bumps ---------------------------------------------------------


def smooth_ramp(u):
    """C-infinity ramp: 0 for u <= 0, 1 for u >= 1, strictly increasing between."""
    u = np.asarray(u, dtype=float)
    lo = np.zeros_like(u)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
        r = np.where(a + b > 0, a / (a + b), lo)
    r[u <= 0] = 0.0
    r[u >= 1] = 1.0
    return r


class PlateauBump:
    """Smooth bump: 1 on a flat core, 0 outside a support interval.

    support = (a, d), flat = (b, c) with a < b <= c < d.  The ramps are the
    standard exponential ones, so every derivative vanishes at a, b, c, d.
    """

    __slots__ = ("support", "flat")

    def __init__(self, support, flat):
        a, d = map(float, support)
        b, c = map(float, flat)
        if not (a < b <= c < d):
            raise ValueError("need support_lo < flat_lo <= flat_hi < support_hi")
        self.support = (a, d)
        self.flat = (b, c)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, d = self.support
        b, c = self.flat
        out = np.zeros_like(x)
        left = (x > a) & (x < b)
        out[left] = smooth_ramp((x[left] - a) / (b - a))
        out[(x >= b) & (x <= c)] = 1.0
        right = (x > c) & (x < d)
        out[right] = smooth_ramp((d - x[right]) / (d - c))
        return out

    def derivative_bounds(self, orders, samples=1 << 14):
        """Measured sup of |k-th derivative| * width^k for k in ``orders``.

        Finite differences on a dense clenched grid; the returned constants
        are what the adaptedness checks report.
        """
        a, d = self.support
        width = d - a
        pad = 0.05 * width
        xs = np.linspace(a - pad, d + pad, samples)
        h = xs[1] - xs[0]
        vals = self(xs)
        consts = {}
        for k in sorted(orders):
            deriv = vals
            for _ in range(k):
                deriv = np.gradient(deriv, h)
            consts[k] = float(np.abs(deriv).max() * width**k)
        return consts


# -- positive band-limited kernels ----------------------------------------


class PositiveBandKernel:
    """Strictly positive even kernel with compactly supported spectrum.

    A single sinc power is band-limited and decays polynomially but
    vanishes on a lattice; the fix is a pair at incommensurable widths,

        kern(t) = sinc(t/w)^(2m) + sinc(t/(w*sqrt(2)))^(2m),

    whose zero sets are disjoint, normalized to unit grid mass.  Spectrum
    radius is m*length/w integer frequencies; construction refuses
    parameters that would alias.  The polynomial envelope
    (1+|t|/w)^(-2m) holds two-sidedly on a bounded window with measured
    constants only; near far sinc zeros the lower constant genuinely
    degrades, which is fine for every use the package makes of it.
    """

    __slots__ = ("size", "length", "width", "half_power", "values", "_mass")

    def __init__(self, size, length, width, half_power):
        m = int(half_power)
        if m < 1:
            raise ValueError("half_power must be >= 1")
        radius = m * length / width
        if radius >= size / 2:
            raise ValueError(
                "kernel would alias: spectrum radius %.1f >= band edge %d"
                % (radius, size // 2)
            )
        self.size = int(size)
        self.length = float(length)
        self.width = float(width)
        self.half_power = m
        dx = self.length / self.size
        d = np.arange(self.size)
        disp = np.where(d <= self.size // 2, d, d - self.size) * dx
        vals = np.sinc(disp / width) ** (2 * m) + np.sinc(disp / (width * np.sqrt(2.0))) ** (
            2 * m
        )
        mass = vals.sum() * dx
        self.values = vals / mass
        self._mass = float(self.values.sum() * dx)

    @property
    def spectrum_radius(self):
        """Largest integer frequency carrying mass above 4e-16 of the peak."""
        c = np.abs(np.fft.fftshift(np.fft.fft(self.values))) / self.size
        ks = np.arange(-(self.size // 2), self.size // 2)
        live = ks[c > 4e-16 * c.max()]
        return int(np.abs(live).max()) if live.size else 0

    def envelope_constants(self, window_widths=40.0, samples=1 << 15):
        """Two-sided constants for the (1+|t|/w)^(-2m) envelope on
        |t| <= window_widths * w (measured, not asymptotic)."""
        w, m = self.width, self.half_power
        half = min(window_widths * w, self.length / 2 * 0.999)
        ts = np.linspace(-half, half, samples)
        raw = np.sinc(ts / w) ** (2 * m) + np.sinc(ts / (w * np.sqrt(2.0))) ** (2 * m)
        env = (1.0 + np.abs(ts) / w) ** (-2 * m)
        ratio = raw / env
        return float(ratio.min()), float(ratio.max())


def convolve(f, kernel):
    """Circular convolution of a grid function with a PositiveBandKernel."""
    if f.size != kernel.size or f.length != kernel.length:
        raise ValueError("kernel built for a different grid")
    out = np.fft.ifft(np.fft.fft(f.values) * np.fft.fft(kernel.values)) * f.dx
    return GridFunction(out, f.length, f.origin)


def smooth_indicator(intervals, kernel, origin=0.0):
    """Indicator of an interval union, mollified by ``kernel``.

    Strictly positive everywhere, band-limited, and exactly summable:
    smoothing a partition of the domain by indicators returns the constant
    one, because the kernel has unit grid mass.
    """
    ind = indicator(intervals, kernel.size, kernel.length, origin)
    return convolve(ind, kernel)
