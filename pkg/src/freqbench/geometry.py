"""Plane geometry for the inscribed lacunary polygon and its cover.

The polygon has vertices on the unit circle at angles pi*2^-mu, reflected
through both axes and truncated near (+-1, 0).  Everything downstream needs
the same few ingredients:

- stable closed forms for vertices, chord slopes and chord steps (product
  forms, no cancellation down to mu ~ 25);
- convex containment tests for the polygon, chord-shell quadrilaterals and
  their sheared pullbacks;
- integer-exact Whitney squares against the diagonal, mapped to rectangle
  families hugging each chord;
- the axis-hugging staircase, pole caps and central square;
- interval projections of the chord families and a bounded-overlap counter;
- a normalized product-bump partition of unity over the whole cover, with a
  machine-checked hypothesis report.

Angles, not symbols: `mu` always indexes the chord whose outer vertex sits
at angle pi*2^-mu from the vertical axis mirror (second quadrant is the
reference quadrant; the other three are reflections).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import smooth_ramp

# ---------------------------------------------------------------------------
# vertices, slopes, chord steps


def quadrant2_vertex(mu: int) -> np.ndarray:
    """Second-quadrant vertex at angle pi - pi*2^-mu: (-cos(pi 2^-mu), sin(pi 2^-mu))."""
    a = math.pi * 2.0 ** (-mu)
    return np.array([-math.cos(a), math.sin(a)])


def chord_slope(mu: int) -> float:
    """Slope of the chord joining the mu and mu+1 vertices (second quadrant).

    Exact form cot(3 pi 2^-(mu+2)); grows like 2^mu * 4/(3 pi).
    """
    return 1.0 / math.tan(3.0 * math.pi * 2.0 ** (-mu - 2))


def chord_step(mu: int) -> np.ndarray:
    """Vertex difference v_{mu+1} - v_mu in the second quadrant, product form.

    Both components are products of sines of small angles, so the value
    stays fully accurate at depths where direct subtraction would lose
    every significant digit.
    """
    t = math.pi * 2.0 ** (-mu - 2)
    return np.array([-2.0 * math.sin(3.0 * t) * math.sin(t),
                     -2.0 * math.cos(3.0 * t) * math.sin(t)])


def chord_diag_span(mu: int) -> float:
    """Length parameter g of the chord pulled back to the (u, u) diagonal."""
    t = math.pi * 2.0 ** (-mu - 2)
    return 2.0 * math.sin(3.0 * t) * math.sin(t)


def shear_pullback(mu: int, xy: np.ndarray) -> np.ndarray:
    """Inverse of the chord shear: (x, y) -> (-x, -y/slope)."""
    s = chord_slope(mu)
    xy = np.asarray(xy, dtype=float)
    return np.stack([-xy[..., 0], -xy[..., 1] / s], axis=-1)


# ---------------------------------------------------------------------------
# rectangles and convex quads


@dataclass(frozen=True)
class Rect:
    """Closed axis-parallel rectangle [x0, x1] x [y0, y1]."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("degenerate rectangle")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def dilate(self, factor: float) -> "Rect":
        cx, cy = self.center
        hx = 0.5 * self.width * factor
        hy = 0.5 * self.height * factor
        return Rect(cx - hx, cx + hx, cy - hy, cy + hy)

    def corners(self) -> np.ndarray:
        return np.array([[self.x0, self.y0], [self.x1, self.y0],
                         [self.x1, self.y1], [self.x0, self.y1]])

    def contains_point(self, x: float, y: float, tol: float = 0.0) -> bool:
        return (self.x0 - tol <= x <= self.x1 + tol
                and self.y0 - tol <= y <= self.y1 + tol)

    def intersects(self, other: "Rect", tol: float = 0.0) -> bool:
        return not (self.x1 < other.x0 - tol or other.x1 < self.x0 - tol
                    or self.y1 < other.y0 - tol or other.y1 < self.y0 - tol)

    def reflect(self, flip_x: bool, flip_y: bool) -> "Rect":
        x0, x1 = (-self.x1, -self.x0) if flip_x else (self.x0, self.x1)
        y0, y1 = (-self.y1, -self.y0) if flip_y else (self.y0, self.y1)
        return Rect(x0, x1, y0, y1)


class ConvexQuad:
    """Convex quadrilateral; vertices are stored counterclockwise."""

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.shape != (4, 2):
            raise ValueError("need four plane vertices")
        if _shoelace(v) < 0:
            v = v[::-1].copy()
        self.vertices = v

    def area(self) -> float:
        return _shoelace(self.vertices)

    def bbox(self) -> Rect:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return Rect(lo[0], hi[0], lo[1], hi[1])

    def contains(self, points, tol: float = 1e-12):
        return _convex_contains(self.vertices, points, tol)


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _convex_contains(verts: np.ndarray, points, tol: float):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    nxt = np.roll(verts, -1, axis=0)
    ex, ey = (nxt - verts).T
    # cross(edge, p - v) >= -tol for every edge of a CCW convex loop
    cross = (ex[None, :] * (pts[:, 1:2] - verts[None, :, 1])
             - ey[None, :] * (pts[:, 0:1] - verts[None, :, 0]))
    inside = np.all(cross >= -tol, axis=1)
    if np.ndim(points) == 1:
        return bool(inside[0])
    return inside


def quad_rect_overlap(quad: ConvexQuad, x0, x1, y0, y1, tol: float = 0.0):
    """Vectorized separating-axis test: which rectangles meet the quad.

    Rectangle coordinates may be arrays of equal shape.
    """
    x0 = np.asarray(x0, float)
    x1 = np.asarray(x1, float)
    y0 = np.asarray(y0, float)
    y1 = np.asarray(y1, float)
    v = quad.vertices
    ok = np.ones(x0.shape, dtype=bool)
    # axis-aligned separation
    ok &= (x0 <= v[:, 0].max() + tol) & (x1 >= v[:, 0].min() - tol)
    ok &= (y0 <= v[:, 1].max() + tol) & (y1 >= v[:, 1].min() - tol)
    # quad edge normals
    nxt = np.roll(v, -1, axis=0)
    for (ax, ay), (bx, by) in zip(v, nxt):
        nx, ny = ay - by, bx - ax  # inward normal of a CCW edge
        qproj = v @ np.array([nx, ny])
        rect_lo = nx * np.where(nx >= 0, x0, x1) + ny * np.where(ny >= 0, y0, y1)
        rect_hi = nx * np.where(nx >= 0, x1, x0) + ny * np.where(ny >= 0, y1, y0)
        ok &= (rect_lo <= qproj.max() + tol) & (rect_hi >= qproj.min() - tol)
    return ok


# ---------------------------------------------------------------------------
# the polygon


class LacunaryPolygon:
    """Closed inscribed polygon with lacunary vertex angles.

    Vertices sit on the unit circle at angles +-pi*2^-mu around the
    vertical axis for mu = 1..mu_max+1, in all four quadrants, plus the
    truncation vertices (+-1, 0) closing the loop near the horizontal
    poles.  4*mu_max + 4 vertices in all, counterclockwise.
    """

    __slots__ = ("mu_max", "vertices", "edge_mu", "_edge_a", "_edge_d")

    def __init__(self, mu_max: int):
        if mu_max < 1:
            raise ValueError("mu_max must be at least 1")
        self.mu_max = int(mu_max)
        upper = []  # (angle, chord index of the edge *leaving* this vertex)
        for mu in range(mu_max + 1, 0, -1):  # first quadrant, ascending angle
            upper.append(math.pi * 2.0 ** (-mu))
        for mu in range(2, mu_max + 2):      # second quadrant
            upper.append(math.pi - math.pi * 2.0 ** (-mu))
        angles = [0.0] + upper + [math.pi] + [2.0 * math.pi - a for a in reversed(upper)]
        self.vertices = np.array([[math.cos(a), math.sin(a)] for a in angles])

        # chord index per edge: edge k joins vertex k to k+1 (wrapping);
        # the edge between angles pi*2^-(mu+1) and pi*2^-mu belongs to mu,
        # truncation edges get mu_max + 1.
        mus = [mu_max + 1]
        for mu in range(mu_max, 0, -1):
            mus.append(mu)
        for mu in range(1, mu_max + 1):
            mus.append(mu)
        mus.append(mu_max + 1)
        self.edge_mu = np.array(mus + mus[::-1])
        if len(self.edge_mu) != len(self.vertices):
            raise AssertionError("edge bookkeeping is off")

        self._edge_a = self.vertices
        self._edge_d = np.roll(self.vertices, -1, axis=0) - self.vertices

    # -- containment -------------------------------------------------------

    def contains(self, points, tol: float = 1e-12):
        """Closed containment test (boundary counts as inside up to tol)."""
        return _convex_contains(self.vertices, points, tol)

    def quadrant2_vertices(self) -> np.ndarray:
        return np.array([quadrant2_vertex(mu) for mu in range(1, self.mu_max + 2)])

    # -- distances and sampling -------------------------------------------

    def edge_distances(self, points) -> np.ndarray:
        """Distance from each point to each boundary edge segment."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        a = self._edge_a[None, :, :]
        d = self._edge_d[None, :, :]
        w = pts[:, None, :] - a
        denom = np.sum(d * d, axis=2)
        t = np.clip(np.sum(w * d, axis=2) / denom, 0.0, 1.0)
        proj = a + t[:, :, None] * d
        return np.linalg.norm(pts[:, None, :] - proj, axis=2)

    def interior_samples(self, count: int, rng, guard_frac: float = 0.2) -> np.ndarray:
        """Uniform interior points keeping a per-chord guard off the boundary.

        A point is accepted when its distance to every edge of chord index
        mu exceeds guard_frac * 4^-mu.  Finite Whitney families cannot
        reach all the way to a chord, so the cover check needs this guard.
        The truncation edges use the last chord's guard scale.
        """
        eff_mu = np.minimum(self.edge_mu, self.mu_max).astype(float)
        guards = guard_frac * 4.0 ** (-eff_mu)
        out = []
        need = count
        while need > 0:
            batch = max(4 * need, 256)
            pts = rng.uniform(-1.0, 1.0, size=(batch, 2))
            pts = pts[self.contains(pts, tol=0.0)]
            if len(pts) == 0:
                continue
            dist = self.edge_distances(pts)
            keep = np.all(dist > guards[None, :], axis=1)
            pts = pts[keep]
            out.append(pts[:need])
            need -= len(pts[:need])
        return np.concatenate(out, axis=0)


# ---------------------------------------------------------------------------
# chord shells and their sheared pullbacks


def chord_shell(mu: int, r: int = 0) -> ConvexQuad:
    """Quadrilateral between the (1-(2^r - 1) 4^-mu)- and
    (1-(2^(r+1) - 1) 4^-mu)-dilates of the polygon, under chord mu
    (second quadrant).  r = 0 is the outermost ring touching the chord."""
    c0 = (2.0 ** r - 1.0) * 4.0 ** (-mu)
    c1 = (2.0 ** (r + 1) - 1.0) * 4.0 ** (-mu)
    va, vb = quadrant2_vertex(mu), quadrant2_vertex(mu + 1)
    return ConvexQuad([(1 - c0) * va, (1 - c0) * vb, (1 - c1) * vb, (1 - c1) * va])


def trapezoid(mu: int) -> ConvexQuad:
    """Outermost chord shell: between the polygon and its (1-4^-mu)-dilate."""
    return chord_shell(mu, 0)


@dataclass(frozen=True)
class ChordFrame:
    """Sheared local frame of one chord shell.

    Absolute points map to local (u, w) via the pullback
    (x, y) -> (-(x - ax), -(y - ay)/slope); the chord itself pulls back to
    a segment of the diagonal u = w starting at the origin.
    """

    mu: int
    shell: int
    anchor: tuple[float, float]
    slope: float
    local_quad: ConvexQuad

    def to_absolute(self, u, w):
        ax, ay = self.anchor
        return np.stack([ax - np.asarray(u, float),
                         ay - self.slope * np.asarray(w, float)], axis=-1)


def shell_frame(mu: int, r: int = 0) -> ChordFrame:
    c0 = (2.0 ** r - 1.0) * 4.0 ** (-mu)
    c1 = (2.0 ** (r + 1) - 1.0) * 4.0 ** (-mu)
    s = chord_slope(mu)
    g = chord_diag_span(mu)
    va, vb = quadrant2_vertex(mu), quadrant2_vertex(mu + 1)
    anchor = (1.0 - c0) * va
    dc = c1 - c0
    pa = shear_pullback(mu, va)
    pb = shear_pullback(mu, vb)
    gg = (1.0 - c0) * g
    corners = [(0.0, 0.0), (gg, gg),
               (gg - dc * pb[0], gg - dc * pb[1]),
               (-dc * pa[0], -dc * pa[1])]
    return ChordFrame(mu, r, (anchor[0], anchor[1]), s, ConvexQuad(corners))


# ---------------------------------------------------------------------------
# Whitney squares against the diagonal


@dataclass(frozen=True)
class DyadicSquare:
    """Square of side 2^j centered at (m, n) * 2^(j-q)."""

    j: int
    q: int
    m: int
    n: int

    @property
    def side(self) -> float:
        return 2.0 ** self.j

    @property
    def center(self) -> tuple[float, float]:
        step = 2.0 ** (self.j - self.q)
        return (self.m * step, self.n * step)

    def rect(self) -> Rect:
        cx, cy = self.center
        h = 0.5 * self.side
        return Rect(cx - h, cx + h, cy - h, cy + h)


def diagonal_gap(square: DyadicSquare, factor: int) -> bool:
    """True when the factor-dilate of the square misses the diagonal.

    Integer-exact: factor*S meets {u = w} iff |m - n| <= factor * 2^q.
    """
    return abs(square.m - square.n) > factor * (1 << square.q)


def diagonal_near(square: DyadicSquare, factor: int) -> bool:
    """True when the factor-dilate of the square meets the diagonal."""
    return abs(square.m - square.n) <= factor * (1 << square.q)


# ---------------------------------------------------------------------------
# rectangle families (stored as coordinate arrays, not object soup)


@dataclass
class RectFamily:
    """One batch of closed rectangles with shared provenance."""

    kind: str                 # "core", "cap", "stair", "ring"
    quadrant: int             # 1..4
    mu: int | None
    shell: int | None
    x0: np.ndarray
    x1: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    squares: list[DyadicSquare] = field(default_factory=list)
    n_clipped: int = 0

    def __len__(self) -> int:
        return len(self.x0)

    def rect(self, i: int) -> Rect:
        return Rect(self.x0[i], self.x1[i], self.y0[i], self.y1[i])

    def reflected(self, flip_x: bool, flip_y: bool, quadrant: int) -> "RectFamily":
        x0, x1 = ((-self.x1, -self.x0) if flip_x else (self.x0, self.x1))
        y0, y1 = ((-self.y1, -self.y0) if flip_y else (self.y0, self.y1))
        return RectFamily(self.kind, quadrant, self.mu, self.shell,
                          np.array(x0), np.array(x1), np.array(y0), np.array(y1),
                          list(self.squares))


DEFAULT_GUARD_FRAC = 0.2


def whitney_shell_rects(mu: int, r: int = 0, C0: int = 4, q: int = 1,
                        alpha: float = 0.99,
                        guard_frac: float = DEFAULT_GUARD_FRAC,
                        thin: bool = True, max_scales: int = 16,
                        clip: LacunaryPolygon | None = None) -> RectFamily:
    """Whitney rectangles for one chord shell (second quadrant).

    Dyadic squares near the diagonal (C0-dilate clear of it, 4C0-dilate
    meeting it) are kept when the alpha-dilate of their sheared image meets
    the shell, then pushed forward through the chord shear.  Scales run
    from the coarsest that clears the band down to the one whose closest
    squares sit inside the sampling guard (guard_frac * 4^-mu off the
    chord), so the family covers every guarded point of its shell.

    `thin` keeps the full offset band (C0, 4C0] * 2^q only on the top two
    nonempty scales; below, offsets above 2 C0 * 2^q duplicate distance
    bands already covered one scale up and are skipped.  `clip` drops the
    rare members whose corners leave the closed polygon (the coarse-scale
    spill-over artifact of a desk-sized C0); the count is recorded.
    """
    if C0 < 2:
        raise ValueError("need C0 >= 2 for a nonempty clearance band")
    frame = shell_frame(mu, r)
    quad = frame.local_quad
    bb = quad.bbox()
    s = frame.slope
    ax, ay = frame.anchor

    lo_off = C0 * (1 << q) + 1       # |m - n| strictly above C0 * 2^q
    hi_full = 4 * C0 * (1 << q)      # 4C0-dilate still meets the diagonal
    hi_thin = 2 * C0 * (1 << q)

    # local offset (w - u) maps to absolute chord distance by this factor
    dist_factor = s / math.hypot(1.0, s)
    target = 0.75 * guard_frac * 4.0 ** (-mu)

    squares: list[DyadicSquare] = []
    xs0, xs1, ys0, ys1 = [], [], [], []
    n_clipped = 0
    j = math.floor(math.log2(max(bb.x1 - bb.x0, bb.y1 - bb.y0)))
    found = 0
    for _ in range(64):
        step = 2.0 ** (j - q)
        h = 2.0 ** (j - 1)
        hi_off = hi_full if (not thin or found < 2) else hi_thin
        m_lo = math.floor((bb.x0 - h) / step) - 1
        m_hi = math.ceil((bb.x1 + h) / step) + 1
        ms = np.arange(m_lo, m_hi + 1)
        offs = np.arange(lo_off, hi_off + 1)
        M, O = np.meshgrid(ms, offs, indexing="ij")
        N = M + O  # shell sits above the diagonal (w > u locally)
        uc = M * step
        wc = N * step
        ah = alpha * h
        hit = quad_rect_overlap(quad, uc - ah, uc + ah, wc - ah, wc + ah)
        keep = np.argwhere(hit)
        if len(keep) > 0:
            found += 1
            rx0 = ax - (uc[hit] + h)
            rx1 = ax - (uc[hit] - h)
            ry0 = ay - s * (wc[hit] + h)
            ry1 = ay - s * (wc[hit] - h)
            good = np.ones(len(rx0), dtype=bool)
            if clip is not None:
                for cx, cy in ((rx0, ry0), (rx1, ry0), (rx1, ry1), (rx0, ry1)):
                    good &= clip.contains(np.stack([cx, cy], axis=1), tol=1e-12)
                n_clipped += int((~good).sum())
            for t, (i, k) in enumerate(keep):
                if good[t]:
                    squares.append(DyadicSquare(j, q, int(M[i, k]), int(N[i, k])))
            xs0.extend(rx0[good])
            xs1.extend(rx1[good])
            ys0.extend(ry0[good])
            ys1.extend(ry1[good])
            closest = (C0 + 2.0 ** (-q)) * 2.0 ** j * dist_factor
            if closest < target or found >= max_scales:
                break
        elif found > 0:
            break
        j -= 1
    fam = RectFamily("ring", 2, mu, r,
                     np.array(xs0), np.array(xs1), np.array(ys0), np.array(ys1),
                     squares)
    fam.n_clipped = n_clipped
    return fam


# ---------------------------------------------------------------------------
# staircase, caps, central square


def staircase_rect(mu: int, boosted: bool = True, overlap_frac: float = 0.0) -> Rect:
    """Axis-hugging staircase rectangle under chord mu, second quadrant.

    Uses the corrected dilation factors (the ones the original figure
    draws): the displayed closed form puts a corner outside the polygon
    for every mu, see `staircase_rect_literal`.  `boosted` keeps the taller
    height (1 - 4^-mu) sin(pi 2^-mu), which together with the corrected
    abscissas stays inside with margin ~0.3 * 4^-mu.  `overlap_frac`
    widens the inner edge into the neighbor so that alpha-shrinks of
    consecutive members still overlap at desk alpha.
    """
    if mu < 2:
        raise ValueError("staircase starts at mu = 2")
    a = math.pi * 2.0 ** (-mu)
    outer = (1.0 - 4.0 ** (-mu + 1)) * math.cos(a / 2.0)
    inner = (1.0 - 4.0 ** (-mu + 2)) * math.cos(a)
    if boosted:
        top = (1.0 - 4.0 ** (-mu)) * math.sin(a)
    else:
        top = (1.0 - 4.0 ** (-mu + 1)) * math.sin(a)
    inner -= overlap_frac * (outer - inner)
    return Rect(-outer, -inner, 0.0, top)


def staircase_rect_literal(mu: int) -> Rect:
    """The displayed closed form, kept verbatim for the record.

    Its top-outer corner lies outside the polygon for every mu (radius
    excess ~(3 pi^2/8 - 1) 4^-mu); the working collection uses
    `staircase_rect` instead.
    """
    if mu < 2:
        raise ValueError("staircase starts at mu = 2")
    a = math.pi * 2.0 ** (-mu)
    outer = (1.0 - 4.0 ** (-mu)) * math.cos(a / 2.0)
    inner = (1.0 - 4.0 ** (-mu + 1)) * math.cos(a)
    top = (1.0 - 4.0 ** (-mu)) * math.sin(a)
    return Rect(-outer, -inner, 0.0, top)


def truncation_fillers(mu_max: int, alpha: float = 0.99,
                       overlap_frac: float = 0.1,
                       guard_frac: float = DEFAULT_GUARD_FRAC) -> list[Rect]:
    """Axis-anchored mini-staircase between the last chord zone and the
    truncation chord (second quadrant).

    The truncation chord joins (-1, 0) to the innermost vertex and has no
    Whitney family; a single rectangle cannot hug it because the chord
    recedes as y drops.  Rectangle k spans heights [0, y_top (1 - k/K)]
    with its left edge tracking the chord at that height, overlapping the
    previous member.  Uniform height steps keep every chord wedge thinner
    than the sampling guard: the wedge per step is tan(a/2) y_top / K and
    tan(a/2) y_top ~ (pi^2/4) 4^-mu_max, so K ~ pi^2/(2 guard_frac) works
    for every depth.  Margins absorb the (1/alpha)-dilation applied by the
    cover (the dilation pushes the top edge up, which costs tan(a/2) * dy
    of horizontal clearance against the slanted chord).
    """
    a = math.pi * 2.0 ** (-mu_max - 1)
    tan_half = math.tan(0.5 * a)
    sin_a = math.sin(a)
    scale = 4.0 ** (-mu_max)
    margin = 0.3 * guard_frac * scale
    infl = 1.0 / alpha - 1.0
    if mu_max >= 2:
        right0 = staircase_rect(mu_max).x0
    else:
        # Reach into the central square: exact abutment would leave a gap
        # between the two alpha-shrinks.
        right0 = -(2.0 * alpha - 1.0) * math.sqrt(0.5)
    levels = math.ceil(math.pi ** 2 / (2.0 * guard_frac)) + 1
    y_top = (1.0 - 0.5 / levels) * sin_a
    step = y_top / levels
    rects = []
    prev_left = right0
    for k in range(levels):
        # Half-step vertical overlap between consecutive columns; the
        # chord position is taken at the dilation-inflated top so the
        # stored member's corner stays clear of the chord.
        built_top = y_top if k == 0 else y_top * (1.0 - k / levels) + 0.5 * step
        chord_x = -1.0 + tan_half * built_top * (1.0 + infl)
        w_raw = prev_left - chord_x
        if w_raw <= margin:
            continue
        left = chord_x + margin
        right = prev_left + overlap_frac * (prev_left - left)
        rects.append(Rect(left, right, 0.0, built_top))
        prev_left = left
    # Apex member: owns the band between the top column and the polygon
    # vertex, reaching slightly past the vertex height.  Its left edge
    # clears the next chord up, so at shallow depths (where that chord
    # recedes faster than the band is wide) it degenerates and is skipped;
    # there the central square and the chord families own the apex.
    top_a = 1.01 * sin_a
    vx, vy = quadrant2_vertex(mu_max + 1)
    s_next = chord_slope(mu_max)
    left_a = vx + (top_a * (1.0 + infl) - sin_a) / s_next \
        + 0.15 * guard_frac * scale
    right_a = right0 + overlap_frac * (right0 - left_a)
    if rects and left_a < right_a:
        rects.insert(0, Rect(left_a, right_a, y_top - 2.0 * step, top_a))
    return rects


def central_square() -> Rect:
    h = math.sqrt(0.5)
    return Rect(-h, h, -h, h)


def pole_caps() -> list[Rect]:
    """Two rectangles plugging the lens under each vertical pole vertex.

    The staircase tops at mu = 2 leave the set {|x| < 0.104,
    sqrt(1/2) < y < 0.75 - 0.415 |x|} uncovered; [-0.54, 0.54] x [0, 0.76]
    contains it, stays under chord 1 (1 - (sqrt 2 - 1) * 0.54 = 0.776 >
    0.76), and its 0.99-shrink still swallows the lens.
    """
    return [Rect(-0.54, 0.54, 0.0, 0.76), Rect(-0.54, 0.54, -0.76, 0.0)]


def _family_from_rects(kind: str, quadrant: int, rects: list[Rect],
                       mu=None, shell=None) -> RectFamily:
    return RectFamily(kind, quadrant, mu, shell,
                      np.array([r.x0 for r in rects]),
                      np.array([r.x1 for r in rects]),
                      np.array([r.y0 for r in rects]),
                      np.array([r.y1 for r in rects]))


def polygon_cover(polygon: LacunaryPolygon, alpha: float = 0.99, C0: int = 4,
                  q: int = 1, shells: int = 3,
                  guard_frac: float = DEFAULT_GUARD_FRAC,
                  stair_overlap: float = 0.1) -> list[RectFamily]:
    """Full rectangle cover of the polygon interior.

    Central square + pole caps + (1/alpha)-dilated staircase and
    truncation fillers (all quadrant images) + Whitney rectangle families
    for up to `shells` dyadic chord shells per chord (a shell is skipped
    once its inner dilation factor would drop below 1/2; the staircase and
    square own the deep interior).

    The staircase members are stored dilated so that their alpha-shrinks
    reproduce the undilated staircase, which touches the horizontal axis;
    undilated members would leave an uncovered sliver along it.  With the
    corrected staircase factors the dilates stay inside the closed polygon
    for alpha >= 0.96 (margin ~0.2 * 4^-mu, machine-checked by the
    hypothesis report).  Every member is contained in the closed polygon
    and the alpha-shrinks cover the guarded interior.
    """
    fams: list[RectFamily] = [
        _family_from_rects("core", 0, [central_square()]),
        _family_from_rects("cap", 0, pole_caps()),
    ]
    stair2 = [staircase_rect(mu, overlap_frac=stair_overlap)
              for mu in range(2, polygon.mu_max + 1)]
    stair2.extend(truncation_fillers(polygon.mu_max, alpha=alpha))
    dilated = [r.dilate(1.0 / alpha) for r in stair2]
    base = _family_from_rects("stair", 2, dilated)
    fams.append(base)
    fams.append(base.reflected(True, False, 1))
    fams.append(base.reflected(False, True, 3))
    fams.append(base.reflected(True, True, 4))
    for mu in range(1, polygon.mu_max + 1):
        for r in range(shells):
            if (2.0 ** (r + 1) - 1.0) * 4.0 ** (-mu) > 0.5:
                break
            fam = whitney_shell_rects(mu, r, C0=C0, q=q, alpha=alpha,
                                      guard_frac=guard_frac, clip=polygon)
            if len(fam) == 0:
                continue
            fams.append(fam)
            fams.append(fam.reflected(True, False, 1))
            fams.append(fam.reflected(False, True, 3))
            fams.append(fam.reflected(True, True, 4))
    return fams


# ---------------------------------------------------------------------------
# interval projections of one chord family


@dataclass
class ChordIntervals:
    """Merged projection intervals of the outermost chord family.

    i = 1: horizontal projections, i = 2: vertical, i = 3: the reflected
    sum -(J1_R + J2_R) rectangle by rectangle.  `dilated` holds the
    (1/alpha)-dilates about each component's center.
    """

    mu: int
    alpha: float
    components: dict[int, list[tuple[float, float]]]
    dilated: dict[int, list[tuple[float, float]]]

    def connected(self, i: int) -> bool:
        return len(self.components[i]) == 1

    def span(self, i: int) -> tuple[float, float]:
        comp = self.components[i]
        return comp[0][0], comp[-1][1]


def _merge_intervals(pairs: list[tuple[float, float]]) -> list[tuple[float, float]]:
    pairs = sorted(pairs)
    out = [list(pairs[0])]
    for a, b in pairs[1:]:
        if a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def chord_intervals(mu: int, C0: int = 4, q: int = 1,
                    alpha: float = 0.99,
                    guard_frac: float = DEFAULT_GUARD_FRAC) -> ChordIntervals:
    fam = whitney_shell_rects(mu, 0, C0=C0, q=q, alpha=alpha,
                              guard_frac=guard_frac)
    j1 = _merge_intervals(list(zip(fam.x0, fam.x1)))
    j2 = _merge_intervals(list(zip(fam.y0, fam.y1)))
    j3 = _merge_intervals([(-(b + d), -(a + c))
                           for a, b, c, d in zip(fam.x0, fam.x1, fam.y0, fam.y1)])
    comps = {1: j1, 2: j2, 3: j3}
    dil = {}
    for i, comp in comps.items():
        out = []
        for a, b in comp:
            c, h = 0.5 * (a + b), 0.5 * (b - a) / alpha
            out.append((c - h, c + h))
        dil[i] = _merge_intervals(out)
    return ChordIntervals(mu, alpha, comps, dil)


def interval_overlap_count(families: list[ChordIntervals], i: int) -> int:
    """Max number of dilated i-intervals covering a single point.

    Endpoints at depth mu live at scale 4^-mu around O(1) anchors; the
    chord anchors themselves come from stable product-form steps, so the
    sweep decides ties from differences far above roundoff.
    """
    events = []
    for fam in families:
        for a, b in fam.dilated[i]:
            events.append((a, 1))
            events.append((b, -1))
    events.sort()
    best = cur = 0
    for _, delta in events:
        cur += delta
        best = max(best, cur)
    return best


# ---------------------------------------------------------------------------
# partition of unity


def plateau_profile(t, alpha: float):
    """Even C^inf profile: 1 on [-alpha, alpha], 0 outside (-1, 1)."""
    t = np.abs(np.asarray(t, dtype=float))
    return smooth_ramp((1.0 - t) / (1.0 - alpha))


@dataclass
class PartitionReport:
    """Machine-checked hypotheses for a rectangle cover of an open region."""

    containment_ok: bool
    containment_offenders: list
    max_containment_violation: float
    cover_ok: bool
    cover_checked: int
    cover_misses: int
    m1: int
    m2: float
    alpha: float
    guard_frac: float

    @property
    def ok(self) -> bool:
        return self.containment_ok and self.cover_ok


class PolygonPartition:
    """Normalized product-bump partition subordinate to a rectangle cover.

    Each member R carries eta_R(x, y) = prof((x-cx)/hx) * prof((y-cy)/hy)
    with the canonical plateau profile, so chi_{alpha R} <= eta_R <=
    chi_R exactly; psi_R = eta_R / sum eta.  The weights sum to 1 wherever
    any member's shrink covers the point, which the hypothesis report
    verifies on guarded interior samples.
    """

    def __init__(self, polygon: LacunaryPolygon, families: list[RectFamily],
                 alpha: float = 0.99, bucket_bits: int = 8):
        self.polygon = polygon
        self.families = families
        self.alpha = float(alpha)
        self.x0 = np.concatenate([f.x0 for f in families])
        self.x1 = np.concatenate([f.x1 for f in families])
        self.y0 = np.concatenate([f.y0 for f in families])
        self.y1 = np.concatenate([f.y1 for f in families])
        self.family_of = np.concatenate(
            [np.full(len(f), k, dtype=np.int32) for k, f in enumerate(families)])
        self.cx = 0.5 * (self.x0 + self.x1)
        self.cy = 0.5 * (self.y0 + self.y1)
        self.hx = 0.5 * (self.x1 - self.x0)
        self.hy = 0.5 * (self.y1 - self.y0)

        self._nb = 1 << bucket_bits
        self._lo, self._hi = -1.05, 1.05
        self._scale = self._nb / (self._hi - self._lo)
        ix0 = self._bucket(self.x0)
        ix1 = self._bucket(self.x1)
        iy0 = self._bucket(self.y0)
        iy1 = self._bucket(self.y1)
        buckets: dict[tuple[int, int], list[int]] = {}
        for i in range(len(self.x0)):
            for bx in range(ix0[i], ix1[i] + 1):
                for by in range(iy0[i], iy1[i] + 1):
                    buckets.setdefault((bx, by), []).append(i)
        self._buckets = {k: np.array(v, dtype=np.int64) for k, v in buckets.items()}

    def __len__(self) -> int:
        return len(self.x0)

    def _bucket(self, coords):
        idx = np.floor((np.asarray(coords) - self._lo) * self._scale).astype(int)
        return np.clip(idx, 0, self._nb - 1)

    def _candidates(self, pts: np.ndarray):
        bx = self._bucket(pts[:, 0])
        by = self._bucket(pts[:, 1])
        ids, owners = [], []
        empty = np.array([], dtype=np.int64)
        for pi, key in enumerate(zip(bx, by)):
            cand = self._buckets.get(key, empty)
            if len(cand):
                ids.append(cand)
                owners.append(np.full(len(cand), pi, dtype=np.int64))
        if not ids:
            return empty, empty
        return np.concatenate(ids), np.concatenate(owners)

    def member_weights(self, pts):
        """Raw bump values: (member ids, point ids, eta) triples, sparse."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ids, owners = self._candidates(pts)
        if len(ids) == 0:
            return ids, owners, np.array([])
        tx = (pts[owners, 0] - self.cx[ids]) / self.hx[ids]
        ty = (pts[owners, 1] - self.cy[ids]) / self.hy[ids]
        eta = plateau_profile(tx, self.alpha) * plateau_profile(ty, self.alpha)
        keep = eta > 0.0
        return ids[keep], owners[keep], eta[keep]

    def partition_sum(self, pts):
        """Sum of normalized weights at each point (0 where nothing covers)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ids, owners, eta = self.member_weights(pts)
        denom = np.zeros(len(pts))
        np.add.at(denom, owners, eta)
        total = np.zeros(len(pts))
        ok = denom > 0.0
        psum = np.zeros(len(pts))
        np.add.at(psum, owners, eta / np.where(denom[owners] > 0, denom[owners], 1.0))
        total[ok] = psum[ok]
        return total

    def weights_at_point(self, x: float, y: float):
        """Normalized weight of every member at one point (dense, for tests)."""
        pts = np.array([[x, y]])
        ids, owners, eta = self.member_weights(pts)
        denom = eta.sum()
        out = np.zeros(len(self))
        if denom > 0:
            out[ids] = eta / denom
        return out

    def hypothesis_report(self, rng, cover_samples: int = 4000,
                          overlap_samples: int = 4000,
                          guard_frac: float = DEFAULT_GUARD_FRAC,
                          containment_tol: float = 1e-9) -> PartitionReport:
        # (1) every member inside the closed region
        offenders = []
        worst = 0.0
        corners = np.stack([
            np.stack([self.x0, self.y0], axis=1),
            np.stack([self.x1, self.y0], axis=1),
            np.stack([self.x1, self.y1], axis=1),
            np.stack([self.x0, self.y1], axis=1),
        ])
        for cset in corners:
            inside = self.polygon.contains(cset, tol=containment_tol)
            bad = np.nonzero(~inside)[0]
            for i in bad[:64]:
                fam = self.families[self.family_of[i]]
                offenders.append((fam.kind, fam.quadrant, fam.mu, fam.shell,
                                  tuple(cset[i])))
            if len(bad):
                dists = self.polygon.edge_distances(cset[bad]).min(axis=1)
                worst = max(worst, float(dists.max()))

        # (2) alpha-shrinks cover guarded interior samples
        pts = self.polygon.interior_samples(cover_samples, rng, guard_frac)
        ids, owners, _ = self.member_weights(pts)
        tx = np.abs(pts[owners, 0] - self.cx[ids]) / self.hx[ids]
        ty = np.abs(pts[owners, 1] - self.cy[ids]) / self.hy[ids]
        in_shrink = (tx <= self.alpha) & (ty <= self.alpha)
        covered = np.zeros(len(pts), dtype=bool)
        covered[owners[in_shrink]] = True
        misses = int((~covered).sum())

        # (3) bounded overlap, (4) comparability of co-covering members
        pts2 = self.polygon.interior_samples(overlap_samples, rng, guard_frac)
        ids2, owners2, _ = self.member_weights(pts2)
        inside_rect = ((np.abs(pts2[owners2, 0] - self.cx[ids2]) <= self.hx[ids2])
                       & (np.abs(pts2[owners2, 1] - self.cy[ids2]) <= self.hy[ids2]))
        ids2, owners2 = ids2[inside_rect], owners2[inside_rect]
        counts = np.bincount(owners2, minlength=len(pts2))
        m1 = int(counts.max()) if len(counts) else 0
        m2 = 1.0
        order = np.argsort(owners2, kind="stable")
        ids_sorted, owners_sorted = ids2[order], owners2[order]
        bounds = np.searchsorted(owners_sorted, np.arange(len(pts2) + 1))
        for pi in range(len(pts2)):
            group = ids_sorted[bounds[pi]:bounds[pi + 1]]
            if len(group) < 2:
                continue
            for dims in (2 * self.hx[group], 2 * self.hy[group]):
                ratio = float(dims.max() / dims.min())
                m2 = max(m2, ratio)

        return PartitionReport(
            containment_ok=(len(offenders) == 0),
            containment_offenders=offenders,
            max_containment_violation=worst,
            cover_ok=(misses == 0),
            cover_checked=len(pts),
            cover_misses=misses,
            m1=m1,
            m2=m2,
            alpha=self.alpha,
            guard_frac=guard_frac,
        )
