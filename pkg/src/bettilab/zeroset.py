"""Connected-component counting for zero sets on grids, spheres and lines.

The planar counter walks the cells of a corner-sampled grid and joins the
sign-crossing edges of each mixed cell into segments; components are the
connected groups of crossing edges under union-find.  A cell whose four
corners carry one sign can still hide a small oval or a tangency, so cells
where min |f| is small compared to the local gradient scale are refined by
re-sampling on a finer subgrid; fragments confined to one cell's interior
add to the count, fragments that reach the cell wall without showing up in
the crossing graph mark the report as not confident.

The sphere counter runs the same cell logic over the six faces of an
inscribed cube, with corners addressed by integer coordinates of the cube
surface so the faces glue along their seams automatically.  Antipodal
identification (components of the projective curve) is the orbit count under
the map c -> (res-c_x, res-c_y, res-c_z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import Ball, Box
from .polycore import MultiPoly


@dataclass(frozen=True)
class ComponentReport:
    count: int
    touching_boundary: int
    refinement_depth: int
    confident: bool

    def to_json_dict(self) -> dict:
        return {
            "count": self.count,
            "touching_boundary": self.touching_boundary,
            "refinement_depth": self.refinement_depth,
            "confident": self.confident,
        }


# ---------------------------------------------------------------------------
# univariate real root counting
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RootCount:
    count: int
    companion_count: int
    sturm_count: object  # int, or None when the cross-check was skipped
    disagreement: bool


def _trim_leading(desc: np.ndarray, rel: float = 0.0) -> np.ndarray:
    c = np.asarray(desc, dtype=float)
    if c.size == 0:
        return c
    tol = rel * np.max(np.abs(c)) if rel else 0.0
    k = 0
    while k < c.size - 1 and abs(c[k]) <= tol:
        k += 1
    return c[k:]


def _sturm_chain(desc: np.ndarray) -> list:
    p0 = _trim_leading(desc)
    chain = [p0 / np.max(np.abs(p0))]
    if p0.size > 1:
        d1 = np.polyder(chain[0])
        chain.append(d1 / np.max(np.abs(d1)))
    while chain[-1].size > 1:
        _, r = np.polydiv(chain[-2], chain[-1])
        m = np.max(np.abs(r)) if r.size else 0.0
        if m == 0.0:
            break
        r = np.where(np.abs(r) > 1e-12 * m, r, 0.0)
        r = -np.trim_zeros(r, "f")
        if r.size == 0:
            break
        chain.append(r / np.max(np.abs(r)))
    return chain


def _variations(chain: list, x) -> int:
    signs = []
    for c in chain:
        if x == math.inf:
            v = c[0]
        elif x == -math.inf:
            v = c[0] * (-1) ** (c.size - 1)
        else:
            v = np.polyval(c, x)
        if v != 0.0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sturm_count(desc: np.ndarray, a, b) -> int:
    chain = _sturm_chain(desc)
    lo = -math.inf if a is None else a - 1e-9 * (1.0 + abs(a))
    hi = math.inf if b is None else b + 1e-9 * (1.0 + abs(b))
    return _variations(chain, lo) - _variations(chain, hi)


def real_root_count(
    poly,
    interval=None,
    crosscheck: bool = True,
    imag_tol: float = 1e-8,
    merge_tol: float = 1e-8,
) -> RootCount:
    """Count distinct real roots of a univariate polynomial.

    `poly` is a dimension-1 MultiPoly or a sequence of ascending
    coefficients.  The primary count comes from the eigenvalues of the
    companion matrix (roots with relative imaginary part below imag_tol,
    merged within merge_tol); when `crosscheck` is set a floating-point Sturm
    chain recounts them and any mismatch raises the `disagreement` flag
    without overriding the primary count.
    """
    if isinstance(poly, MultiPoly):
        coeffs = poly.univariate_coeffs()
    else:
        coeffs = np.asarray(poly, dtype=float)
    desc = _trim_leading(coeffs[::-1], rel=1e-14)
    if desc.size <= 1:
        return RootCount(0, 0, 0 if crosscheck else None, False)

    roots = np.roots(desc)
    scale = np.maximum(1.0, np.abs(roots))
    real = np.sort(roots[np.abs(roots.imag) <= imag_tol * scale].real)
    if real.size:
        keep = [real[0]]
        for r in real[1:]:
            if r - keep[-1] > merge_tol * max(1.0, abs(r)):
                keep.append(r)
        real = np.array(keep)
    if interval is not None:
        a, b = interval
        pad_a = 1e-12 * (1.0 + abs(a))
        pad_b = 1e-12 * (1.0 + abs(b))
        real = real[(real >= a - pad_a) & (real <= b + pad_b)]
    n_comp = int(real.size)

    n_sturm = None
    if crosscheck:
        if interval is None:
            n_sturm = _sturm_count(desc, None, None)
        else:
            n_sturm = _sturm_count(desc, interval[0], interval[1])
    return RootCount(
        n_comp, n_comp, n_sturm, crosscheck and n_sturm != n_comp
    )


def _direction_monomials(d: int, theta) -> np.ndarray:
    """Monomial table x0^k x1^(d-k) at unit directions (cos t, sin t)."""
    t = np.asarray(theta, dtype=float)
    T = np.vander(np.cos(t), d + 1, increasing=True)
    S = np.vander(np.sin(t), d + 1, increasing=True)[:, ::-1]
    return T * S


def _binary_form_values(diag, theta):
    """sum_k diag[k] x0^k x1^(d-k) at the unit directions (cos t, sin t)."""
    return _direction_monomials(diag.size - 1, theta) @ diag


# direction grids and their monomial tables depend only on (degree, points);
# sharing them across samples is what makes degree-100 sweeps cheap
_DIRECTION_TABLES = {}


def _direction_table(d: int, m: int):
    key = (d, m)
    got = _DIRECTION_TABLES.get(key)
    if got is None:
        theta = np.linspace(0.0, math.pi, m + 1)
        T = np.vander(np.cos(theta), d + 1, increasing=True)
        S = np.vander(np.sin(theta), d + 1, increasing=True)[:, ::-1]
        got = (theta, T * S)
        if len(_DIRECTION_TABLES) < 8:
            _DIRECTION_TABLES[key] = got
    return got


def projective_root_count(
    form, grid_per_degree: int = 24, max_refine: int = 6
) -> int:
    """Sign-crossing roots of a binary form on the real projective line.

    `form` is a 2-variable homogeneous MultiPoly or the ascending array of
    its diagonal coefficients (entry k multiplies x0^k x1^(d-k)).  The form
    is evaluated at unit directions over a half turn, where every monomial
    is bounded by 1 — the companion matrix of the dehomogenised polynomial
    loses far-from-origin roots to rounding already around degree 100, while
    this evaluation stays conditioned at any degree.  Same-sign intervals
    whose endpoint values are small against a second-difference curvature
    scale are re-sampled dyadically (max_refine rounds of 8 subintervals).

    Counts roots of odd multiplicity only; the half-turn (anti)symmetry
    pins the result to the parity of the degree, so misses from an
    unresolved dip always come in pairs.
    """
    if isinstance(form, MultiPoly):
        if form.dimension != 2 or not form.is_homogeneous():
            raise ValueError("form must be a homogeneous binary polynomial")
        d = form.degree()
        diag = np.zeros(d + 1)
        for (a, _b), v in form.terms.items():
            diag[a] = v
    else:
        diag = np.asarray(form, dtype=float)
    if diag.size <= 1 or not np.any(diag):
        return 0
    d = diag.size - 1

    return int(projective_root_counts(diag[None, :], grid_per_degree, max_refine)[0])


def projective_root_counts(
    diags, grid_per_degree: int = 24, max_refine: int = 6
) -> np.ndarray:
    """projective_root_count over a stack of coefficient rows at once.

    `diags` has one ascending diagonal per row; all rows share the degree, so
    the whole batch rides a single direction-table matmul.  Returns an int
    count per row (zero rows count zero).
    """
    D = np.atleast_2d(np.asarray(diags, dtype=float))
    nrows, width = D.shape
    counts = np.zeros(nrows, dtype=int)
    d = width - 1
    if d < 1:
        return counts
    live = np.any(D != 0.0, axis=1)

    m = max(64, grid_per_degree * d)
    theta, W = _direction_table(d, m)
    V = D @ W[:-1].T
    sgn = V >= 0
    # twisted closure: the direction at pi is the one at 0 again, up to the
    # parity sign.  The sign convention (exact zero counts positive) must be
    # twisted too, so flip the boolean rather than negating the value.
    even = d % 2 == 0
    change = np.empty((nrows, m), dtype=bool)
    change[:, :-1] = sgn[:, 1:] != sgn[:, :-1]
    change[:, -1] = sgn[:, -1] != (sgn[:, 0] if even else ~sgn[:, 0])
    counts += change.sum(axis=1)

    # Same-sign endpoints can bracket a hidden crossing pair only if the
    # curvature bends the chord down to zero: the chord never dips below
    # min|v| and the interpolation error is at most h^2 sup|g''| / 8, so an
    # interval is suspect only when min|v| < dd/8 with dd the local second
    # difference (4x cushion applied).  Intervals adjacent to a detected
    # crossing are explained by it.
    sig = 1.0 if even else -1.0
    ext = np.concatenate([sig * V[:, -1:], V, sig * V[:, :2]], axis=1)
    dd = np.abs(ext[:, :-2] - 2.0 * ext[:, 1:-1] + ext[:, 2:])
    dmax = np.maximum(dd[:, :-1], dd[:, 1:])
    near = change.copy()
    near[:, 1:] |= change[:, :-1]
    near[:, :-1] |= change[:, 1:]
    Vfull = np.concatenate([V, sig * V[:, :1]], axis=1)
    amin = np.minimum(np.abs(Vfull[:, :-1]), np.abs(Vfull[:, 1:]))
    flag = ~near & (amin < 0.5 * dmax)
    flag[~live] = False
    counts[~live] = 0

    rows, cols = np.nonzero(flag)
    lo = theta[cols]
    hi = theta[cols + 1]
    offs = np.linspace(0.0, 1.0, 9)
    for _ in range(max_refine):
        if rows.size == 0:
            break
        TH = lo[:, None] + (hi - lo)[:, None] * offs
        E = _direction_monomials(d, TH.ravel())
        Vr = np.einsum("pk,pk->p", E, D[np.repeat(rows, 9)]).reshape(-1, 9)
        s = Vr >= 0
        ch = s[:, 1:] != s[:, :-1]
        np.add.at(counts, rows, ch.sum(axis=1))
        sub_near = ch.copy()
        sub_near[:, 1:] |= ch[:, :-1]
        sub_near[:, :-1] |= ch[:, 1:]
        sub_amin = np.minimum(np.abs(Vr[:, :-1]), np.abs(Vr[:, 1:]))
        rowdd = np.abs(np.diff(Vr, n=2, axis=1)).max(axis=1, keepdims=True)
        subflag = ~sub_near & (sub_amin < 0.5 * rowdd)
        rows = rows[np.nonzero(subflag)[0]]
        lo = TH[:, :-1][subflag]
        hi = TH[:, 1:][subflag]
    return counts


# ---------------------------------------------------------------------------
# field adapters
# ---------------------------------------------------------------------------
class _PolyField:
    def __init__(self, p: MultiPoly):
        if p.dimension != 2:
            raise ValueError("planar counting needs a 2-variable polynomial")
        self.p = p
        self._parts = None

    def on_grid(self, xs, ys):
        return self.p.on_grid(xs, ys)

    def at_points(self, pts):
        return self.p.evaluate_many(pts)

    def grad_norm_on_grid(self, xs, ys):
        if self._parts is None:
            self._parts = (self.p.partial(0), self.p.partial(1))
        gx = self._parts[0].on_grid(xs, ys)
        gy = self._parts[1].on_grid(xs, ys)
        return np.hypot(gx, gy)


class _CallableField:
    def __init__(self, fn):
        self.fn = fn

    def on_grid(self, xs, ys):
        X, Y = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float), indexing="ij")
        return self.at_points(np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape)

    def at_points(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.array([self.fn(p) for p in pts], dtype=float)


def _as_field(f):
    if isinstance(f, MultiPoly):
        return _PolyField(f)
    if hasattr(f, "on_grid") and hasattr(f, "at_points"):
        return f
    if callable(f):
        return _CallableField(f)
    raise TypeError("cannot interpret %r as a planar field" % (f,))


# ---------------------------------------------------------------------------
# crossing-graph machinery
# ---------------------------------------------------------------------------
class _DSU:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        self.add(a)
        self.add(b)
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _cell_edges(i, j):
    # edge keys and the neighbouring cell seen across each edge
    return {
        "b": (("h", i, j), (i, j - 1)),
        "t": (("h", i, j + 1), (i, j + 1)),
        "l": (("v", i, j), (i - 1, j)),
        "r": (("v", i + 1, j), (i + 1, j)),
    }


def _crossing_count(values, active, center_fn):
    """Count zero-curve components seen by the crossing graph of a corner grid.

    values: (m+1, k+1) corner samples; active: (m, k) bool, cells to use;
    center_fn(cells) -> field values at the centres of the given cells (used
    to resolve four-crossing saddle cells).  Returns
    (interior, touching, mixed_mask, dsu, contact).
    """
    sgn = values >= 0
    s00 = sgn[:-1, :-1]
    s10 = sgn[1:, :-1]
    s01 = sgn[:-1, 1:]
    s11 = sgn[1:, 1:]
    allsame = (s00 == s10) & (s00 == s01) & (s00 == s11)
    mixed = active & ~allsame
    ncells = mixed.shape

    cells = [tuple(c) for c in np.argwhere(mixed)]
    ncross = (
        (s00 != s10).astype(int)
        + (s01 != s11)
        + (s00 != s01)
        + (s10 != s11)
    )
    saddles = [c for c in cells if ncross[c] == 4]
    if saddles:
        csigns = center_fn(saddles) >= 0
        csign_of = dict(zip(saddles, csigns))

    dsu = _DSU()
    contact = {}

    def visit(edge, neighbour):
        dsu.add(edge)
        ni, nj = neighbour
        off = not (0 <= ni < ncells[0] and 0 <= nj < ncells[1] and active[ni, nj])
        contact[edge] = contact.get(edge, False) or off

    for (i, j) in cells:
        edges = _cell_edges(i, j)
        crossing = {}
        if sgn[i, j] != sgn[i + 1, j]:
            crossing["b"] = edges["b"]
        if sgn[i, j + 1] != sgn[i + 1, j + 1]:
            crossing["t"] = edges["t"]
        if sgn[i, j] != sgn[i, j + 1]:
            crossing["l"] = edges["l"]
        if sgn[i + 1, j] != sgn[i + 1, j + 1]:
            crossing["r"] = edges["r"]
        for key, nb in crossing.values():
            visit(key, nb)
        names = sorted(crossing)
        if len(names) == 2:
            dsu.union(crossing[names[0]][0], crossing[names[1]][0])
        elif len(names) == 4:
            c = csign_of[(i, j)]
            for s, pair in (
                (sgn[i, j], ("b", "l")),
                (sgn[i + 1, j], ("b", "r")),
                (sgn[i + 1, j + 1], ("t", "r")),
                (sgn[i, j + 1], ("t", "l")),
            ):
                if s != c:
                    dsu.union(crossing[pair[0]][0], crossing[pair[1]][0])

    root_contact = {}
    for e in dsu.parent:
        r = dsu.find(e)
        root_contact[r] = root_contact.get(r, False) or contact[e]
    interior = sum(1 for v in root_contact.values() if not v)
    touching = sum(1 for v in root_contact.values() if v)
    return interior, touching, mixed, dsu, contact


def _near_mixed(mixed: np.ndarray) -> np.ndarray:
    """Dilate a cell mask by one cell in the 8-neighbourhood."""
    out = mixed.copy()
    m = mixed
    out[1:, :] |= m[:-1, :]
    out[:-1, :] |= m[1:, :]
    out[:, 1:] |= m[:, :-1]
    out[:, :-1] |= m[:, 1:]
    out[1:, 1:] |= m[:-1, :-1]
    out[:-1, :-1] |= m[1:, 1:]
    out[1:, :-1] |= m[:-1, 1:]
    out[:-1, 1:] |= m[1:, :-1]
    return out


def _fd_grad_norm(V, hx, hy):
    """Per-corner gradient scale from first differences (with safety factor 2)."""
    gx = np.zeros_like(V)
    dx = np.abs(np.diff(V, axis=0)) / hx
    gx[:-1, :] = dx
    gx[1:, :] = np.maximum(gx[1:, :], dx)
    gy = np.zeros_like(V)
    dy = np.abs(np.diff(V, axis=1)) / hy
    gy[:, :-1] = dy
    gy[:, 1:] = np.maximum(gy[:, 1:], dy)
    return 2.0 * np.hypot(gx, gy)


def _refine_flagged(field, rects, max_depth):
    """Resolve suspicious same-sign cells by batched dyadic re-sampling.

    `rects` is an (ncells, 4) array of cell rectangles (x0, x1, y0, y1).
    All surviving cells are probed together — one field evaluation per depth.
    A cell leaves the pool when the finer grid certifies a safe gap
    (min |f| >= factor * sub-diameter * first-difference gradient scale) or
    when a sign change appears; in the latter case its fragment is counted
    (interior) or poisons confidence (reaches the cell wall).  Cells that
    survive to max_depth without a sign change count as clean.

    Returns (extra_components, clean, depth_used).
    """
    rects = np.asarray(rects, dtype=float).reshape(-1, 4)
    extra = 0
    clean = True
    depth_used = 0
    for depth in range(1, max_depth + 1):
        if rects.shape[0] == 0:
            break
        depth_used = depth
        m = 2**depth
        offs = np.linspace(0.0, 1.0, m + 1)
        x0, x1, y0, y1 = rects.T
        X = x0[:, None] + (x1 - x0)[:, None] * offs
        Y = y0[:, None] + (y1 - y0)[:, None] * offs
        P = np.empty((rects.shape[0], m + 1, m + 1, 2))
        P[..., 0] = X[:, :, None]
        P[..., 1] = Y[:, None, :]
        vals = field.at_points(P.reshape(-1, 2)).reshape(-1, m + 1, m + 1)
        neg = vals < 0
        has_mix = neg.any(axis=(1, 2)) & ~neg.all(axis=(1, 2))
        for ci in np.nonzero(has_mix)[0]:
            W = vals[ci]
            cx = 0.5 * (X[ci, :-1] + X[ci, 1:])
            cy = 0.5 * (Y[ci, :-1] + Y[ci, 1:])

            def centers(cells, cx=cx, cy=cy):
                pts = np.array([(cx[i], cy[j]) for i, j in cells])
                return field.at_points(pts)

            interior, touching = _crossing_count(
                W, np.ones((m, m), dtype=bool), centers
            )[:2]
            if touching:
                clean = False
            else:
                extra += interior
        # safe-gap exit: min |f| beats the worst-case drop across one subcell
        # (true gradient taken as twice the largest first difference)
        hx = (x1 - x0) / m
        hy = (y1 - y0) / m
        gx = (np.abs(np.diff(vals, axis=1)) / hx[:, None, None]).max(axis=(1, 2))
        gy = (np.abs(np.diff(vals, axis=2)) / hy[:, None, None]).max(axis=(1, 2))
        gap = 2.0 * np.hypot(gx, gy) * np.hypot(hx, hy)
        cleared = np.abs(vals).min(axis=(1, 2)) >= gap
        rects = rects[~has_mix & ~cleared]
    return extra, clean, depth_used


def grid_components(
    f,
    domain,
    base_resolution: int = 256,
    max_depth: int = 4,
    ambiguity_factor: float = 4.0,
) -> ComponentReport:
    """Count components of {f = 0} inside a Box or Ball domain.

    Components whose crossing graph stays clear of inactive cells and the
    grid rim are `count`; the rest are `touching_boundary`.  Same-sign cells
    with min |f| below ambiguity_factor * cell_diameter * local_gradient and
    no detected crossing nearby are re-sampled up to max_depth; an unresolved
    fragment flips `confident` off.
    """
    field = _as_field(f)
    if isinstance(domain, (Ball, Box)):
        box = domain.bounding_box()
    else:
        raise TypeError("domain must be a Ball or a Box")
    if box.dimension != 2:
        raise ValueError("grid_components works on 2-dimensional domains")

    xs, ys = box.axes(base_resolution)
    V = field.on_grid(xs, ys)
    if isinstance(domain, Ball):
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        cx, cy = domain.center
        inside = (X - cx) ** 2 + (Y - cy) ** 2 <= domain.radius**2
    else:
        inside = np.ones(V.shape, dtype=bool)
    active = inside[:-1, :-1] & inside[1:, :-1] & inside[:-1, 1:] & inside[1:, 1:]

    ccx = 0.5 * (xs[:-1] + xs[1:])
    ccy = 0.5 * (ys[:-1] + ys[1:])

    def centers(cellids):
        pts = np.array([(ccx[i], ccy[j]) for i, j in cellids])
        return field.at_points(pts)

    interior, touching, mixed = _crossing_count(V, active, centers)[:3]

    # tangency / hidden-oval screen on same-sign active cells
    hx = xs[1] - xs[0]
    hy = ys[1] - ys[0]
    diam = math.hypot(hx, hy)
    if hasattr(field, "grad_norm_on_grid"):
        G = field.grad_norm_on_grid(xs, ys)
    else:
        G = _fd_grad_norm(V, hx, hy)
    Gcell = np.maximum(
        np.maximum(G[:-1, :-1], G[1:, :-1]), np.maximum(G[:-1, 1:], G[1:, 1:])
    )
    A = np.abs(V)
    Amin = np.minimum(
        np.minimum(A[:-1, :-1], A[1:, :-1]), np.minimum(A[:-1, 1:], A[1:, 1:])
    )
    flagged = (
        active
        & ~mixed
        & ~_near_mixed(mixed)
        & (Amin < ambiguity_factor * diam * Gcell)
    )

    idx = np.argwhere(flagged)
    rects = np.column_stack(
        [xs[idx[:, 0]], xs[idx[:, 0] + 1], ys[idx[:, 1]], ys[idx[:, 1] + 1]]
    )
    extra, confident, depth_used = _refine_flagged(field, rects, max_depth)

    return ComponentReport(interior + extra, touching, depth_used, confident)


def compact_component_in_ball(
    f,
    center,
    radius: float,
    base_resolution: int = 256,
    max_depth: int = 4,
):
    """(found, report): does {f = 0} have a component inside the open ball?

    `found` is True when at least one component's crossing graph stays away
    from the ball boundary; the report carries counts and the confidence
    flag.
    """
    report = grid_components(
        f, Ball(tuple(center), float(radius)), base_resolution, max_depth
    )
    return report.count >= 1, report


# ---------------------------------------------------------------------------
# sphere counting over cube faces
# ---------------------------------------------------------------------------
def _face_corner_coords(axis, side, res):
    """Integer cube-surface coordinates of a face's corner grid, plus the
    in-face axes (u, v)."""
    others = [k for k in range(3) if k != axis]
    u, v = others
    a = np.arange(res + 1)
    A, B = np.meshgrid(a, a, indexing="ij")
    C = np.empty((res + 1, res + 1, 3), dtype=np.int64)
    C[..., axis] = res if side > 0 else 0
    C[..., u] = A
    C[..., v] = B
    return C, u, v


def _normalize_rows(P):
    return P / np.linalg.norm(P, axis=-1, keepdims=True)


def _edge_key(c1, c2):
    ax = int(np.argmax(c1 != c2))
    lo = c1 if c1[ax] < c2[ax] else c2
    return (int(lo[0]), int(lo[1]), int(lo[2]), ax)


def sphere_components(
    p: MultiPoly,
    resolution: int = 64,
    identify_antipodal: bool = False,
    max_depth: int = 4,
    ambiguity_factor: float = 4.0,
) -> ComponentReport:
    """Count the components of {p = 0} on the unit sphere in R^3.

    p must be homogeneous in three variables.  The sphere is sampled through
    the six faces of the cube [-1, 1]^3 pushed to the sphere; integer corner
    coordinates make edge keys match along seams.  With identify_antipodal
    the result is the number of antipodal orbits (components of the
    projective curve).
    """
    if p.dimension != 3:
        raise ValueError("sphere counting needs 3 homogeneous variables")
    if not p.is_homogeneous():
        raise ValueError("sphere counting needs a homogeneous polynomial")
    res = int(resolution)
    if res < 2 or res % 2:
        raise ValueError("resolution must be even and at least 2")

    faces = [(ax, sd) for ax in range(3) for sd in (-1, 1)]
    fdata = {}
    for ax, sd in faces:
        C, u, v = _face_corner_coords(ax, sd, res)
        pts = _normalize_rows(2.0 * C / res - 1.0)
        vals = p.evaluate_many(pts.reshape(-1, 3)).reshape(res + 1, res + 1)
        fdata[(ax, sd)] = (C, u, v, pts, vals)

    dsu = _DSU()
    hot = set()  # integer corner coords touching a crossing edge
    mixed_masks = {}
    saddle_jobs = []  # (face, i, j, crossing dict)
    edge_of = {}

    for face in faces:
        C, u, v, pts, vals = fdata[face]
        sgn = vals >= 0
        s00 = sgn[:-1, :-1]
        s10 = sgn[1:, :-1]
        s01 = sgn[:-1, 1:]
        s11 = sgn[1:, 1:]
        mixed = ~((s00 == s10) & (s00 == s01) & (s00 == s11))
        mixed_masks[face] = mixed
        for i, j in np.argwhere(mixed):
            c00, c10 = C[i, j], C[i + 1, j]
            c01, c11 = C[i, j + 1], C[i + 1, j + 1]
            crossing = {}
            if sgn[i, j] != sgn[i + 1, j]:
                crossing["b"] = _edge_key(c00, c10)
            if sgn[i, j + 1] != sgn[i + 1, j + 1]:
                crossing["t"] = _edge_key(c01, c11)
            if sgn[i, j] != sgn[i, j + 1]:
                crossing["l"] = _edge_key(c00, c01)
            if sgn[i + 1, j] != sgn[i + 1, j + 1]:
                crossing["r"] = _edge_key(c10, c11)
            for name, key in crossing.items():
                dsu.add(key)
            for c in (c00, c10, c01, c11):
                hot.add((int(c[0]), int(c[1]), int(c[2])))
            names = sorted(crossing)
            if len(names) == 2:
                dsu.union(crossing[names[0]], crossing[names[1]])
            else:
                saddle_jobs.append((face, int(i), int(j), crossing))

    if saddle_jobs:
        mids = []
        for face, i, j, _ in saddle_jobs:
            C = fdata[face][0]
            m = (
                C[i, j].astype(float)
                + C[i + 1, j]
                + C[i, j + 1]
                + C[i + 1, j + 1]
            ) / 4.0
            mids.append(2.0 * m / res - 1.0)
        cvals = p.evaluate_many(_normalize_rows(np.array(mids)))
        for (face, i, j, crossing), cv in zip(saddle_jobs, cvals):
            sgn = fdata[face][4] >= 0
            c = cv >= 0
            for s, pair in (
                (sgn[i, j], ("b", "l")),
                (sgn[i + 1, j], ("b", "r")),
                (sgn[i + 1, j + 1], ("t", "r")),
                (sgn[i, j + 1], ("t", "l")),
            ):
                if s != c:
                    dsu.union(crossing[pair[0]], crossing[pair[1]])

    roots = {dsu.find(e) for e in dsu.parent}
    n_sphere = len(roots)

    if identify_antipodal and n_sphere:
        orbits = set()
        for r in roots:
            x, y, z, ax = r
            # map both endpoints of the edge and re-canonicalise
            e1 = np.array([x, y, z])
            e2 = e1.copy()
            e2[ax] += 1
            key = _edge_key(res - e1, res - e2)
            # the partner edge crosses too unless a corner sits exactly on
            # the zero set; fall back to a singleton orbit in that case
            partner = dsu.find(key) if key in dsu.parent else r
            orbits.add(frozenset((r, partner)))
        n_main = len(orbits)
    else:
        n_main = n_sphere

    # ambiguity screen per face
    depth_used = 0
    confident = True
    extra = 0
    for face in faces:
        C, u, v, pts, vals = fdata[face]
        mixed = mixed_masks[face]
        h = 2.0 / res  # in-face step before normalisation; curvature-safe scale
        G = _fd_grad_norm(vals, h, h)
        Gcell = np.maximum(
            np.maximum(G[:-1, :-1], G[1:, :-1]), np.maximum(G[:-1, 1:], G[1:, 1:])
        )
        A = np.abs(vals)
        Amin = np.minimum(
            np.minimum(A[:-1, :-1], A[1:, :-1]), np.minimum(A[:-1, 1:], A[1:, 1:])
        )
        flagged = ~mixed & ~_near_mixed(mixed) & (
            Amin < ambiguity_factor * (h * math.sqrt(2.0)) * Gcell
        )
        # corners already explained by a detected crossing exempt their cells
        for i, j in np.argwhere(flagged):
            corners = (C[i, j], C[i + 1, j], C[i, j + 1], C[i + 1, j + 1])
            if any((int(c[0]), int(c[1]), int(c[2])) in hot for c in corners):
                flagged[i, j] = False

        ax, sd = face
        fixed = float(res if sd > 0 else 0)

        def face_field():
            class _F:
                def on_grid(self, us, vs):
                    U, Vv = np.meshgrid(us, vs, indexing="ij")
                    P = np.empty(U.shape + (3,))
                    P[..., ax] = fixed
                    P[..., u] = U
                    P[..., v] = Vv
                    q = _normalize_rows(2.0 * P / res - 1.0)
                    return p.evaluate_many(q.reshape(-1, 3)).reshape(U.shape)

                def at_points(self, uv):
                    uv = np.asarray(uv, dtype=float)
                    P = np.empty((uv.shape[0], 3))
                    P[:, ax] = fixed
                    P[:, u] = uv[:, 0]
                    P[:, v] = uv[:, 1]
                    return p.evaluate_many(_normalize_rows(2.0 * P / res - 1.0))

            return _F()

        idx = np.argwhere(flagged)
        rects = np.column_stack([idx[:, 0], idx[:, 0] + 1, idx[:, 1], idx[:, 1] + 1])
        got, cln, depth = _refine_flagged(face_field(), rects.astype(float), max_depth)
        depth_used = max(depth_used, depth)
        confident = confident and cln
        extra += got

    if identify_antipodal:
        if extra % 2:
            confident = False
        extra //= 2

    return ComponentReport(n_main + extra, 0, depth_used, confident)
