"""Built-in regular pairs and grid verification of their regularity.

A regular pair is a polynomial P together with an open ball U around the
origin such that P's zero set sits well inside U (clause 1: |P| stays above
delta on U minus a compact set) and P is quantitatively non-degenerate near
its zero set (clause 2: |P(y)| < delta implies ||dP(y)|| > epsilon).  Two
families are built in:

* a round sphere: P = sum x_j^2 - sqrt(n) - 1 on the ball of radius
  sqrt(sqrt(n) + 2), regular for (delta, 2 sqrt(sqrt(n) + 1 - delta)) for
  every delta in (0, 1);
* a product-shaped hypersurface S^i x S^{n-1-i}: Q_i =
  (x_1^2 + ... + x_{i+1}^2 - 2)^2 + y_1^2 + ... + y_{n-i-1}^2 - 1 on the
  ball of radius sqrt(5), with the single witness
  (1/(2 sqrt(n)), 2 sqrt(1 - 1/(2 sqrt(n)))).

Verification samples |P| and ||dP|| on the corners of a regular grid.  The
`verified` flag means every sampled corner satisfies both clauses (shell
corners one cell from the boundary play the role of U minus K); the
`worst_margin` is the slack left after padding the corner values with the
Lipschitz error over a cell, so it is a certificate for all of U when
positive — at realistic resolutions it is usually negative while the
pointwise check passes, and that is expected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .domains import Ball
from .polycore import MultiPoly
from .zeroset import ComponentReport, grid_components


@dataclass(frozen=True)
class TransversalityWitness:
    delta: float
    epsilon: float
    grid_resolution: int
    verified: bool
    worst_margin: float

    def to_json_dict(self) -> dict:
        return {
            "delta": self.delta,
            "epsilon": self.epsilon,
            "grid_resolution": self.grid_resolution,
            "verified": self.verified,
            "worst_margin": self.worst_margin,
        }


@dataclass(frozen=True)
class RegularPair:
    """A named (polynomial, ball) pair with its admissible (delta, epsilon)
    family: `family(t)` maps a parameter in `family_interval` to a
    (delta, epsilon) pair; for single-witness pairs the interval is a point.
    """

    name: str
    dimension: int
    polynomial: MultiPoly
    domain: Ball
    family_interval: tuple
    family: object = field(compare=False)
    index: int = 0

    @property
    def R(self) -> float:
        """Working radius used by the constants chain."""
        return max(1.0, self.domain.radius)

    def witness_at(self, t: float) -> tuple:
        return self.family(t)


def sphere_pair(n: int) -> RegularPair:
    if n < 1:
        raise ValueError("n must be positive")
    rn = math.sqrt(n)
    terms = {tuple(2 if k == j else 0 for k in range(n)): 1.0 for j in range(n)}
    terms[(0,) * n] = -(rn + 1.0)
    p = MultiPoly(n, terms)

    def fam(delta: float) -> tuple:
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        return delta, 2.0 * math.sqrt(rn + 1.0 - delta)

    return RegularPair(
        name="sphere",
        dimension=n,
        polynomial=p,
        domain=Ball((0.0,) * n, math.sqrt(rn + 2.0)),
        family_interval=(1e-9, 1.0 - 1e-9),
        family=fam,
    )


def product_pair(n: int, i: int = 0) -> RegularPair:
    """Pair cutting out S^i x S^{n-1-i}; needs 0 <= i <= n-1."""
    if n < 1 or not 0 <= i <= n - 1:
        raise ValueError("need n >= 1 and 0 <= i <= n-1")
    nx = i + 1
    ny = n - i - 1

    def e(j, p):
        return tuple(p if k == j else 0 for k in range(n))

    # (sum_{j<nx} x_j^2 - 2)^2 + sum_{j>=nx} y_j^2 - 1, expanded
    terms = {}

    def add(exp, c):
        terms[exp] = terms.get(exp, 0.0) + c

    for j in range(nx):
        add(e(j, 4), 1.0)
        add(e(j, 2), -4.0)
    for j in range(nx):
        for k in range(j + 1, nx):
            exp = tuple(
                2 if m == j or m == k else 0 for m in range(n)
            )
            add(exp, 2.0)
    for j in range(nx, n):
        add(e(j, 2), 1.0)
    add((0,) * n, 3.0)  # 4 - 1
    p = MultiPoly(n, terms)

    delta = 1.0 / (2.0 * math.sqrt(n))
    eps = 2.0 * math.sqrt(1.0 - delta)

    def fam(_t: float) -> tuple:
        return delta, eps

    return RegularPair(
        name="product",
        dimension=n,
        polynomial=p,
        domain=Ball((0.0,) * n, math.sqrt(5.0)),
        family_interval=(delta, delta),
        family=fam,
        index=i,
    )


# ---------------------------------------------------------------------------
# grid verification
# ---------------------------------------------------------------------------
def _coef_sup(p: MultiPoly, r: float) -> float:
    return p.sup_bound_on_ball(r)


def _group_min(idx: np.ndarray, vals: np.ndarray, out: np.ndarray):
    """out[g] = min(out[g], min of vals where idx == g); idx sorted by group."""
    if idx.size == 0:
        return
    order = np.argsort(idx, kind="stable")
    si = idx[order]
    sv = vals[order]
    starts = np.flatnonzero(np.r_[True, si[1:] != si[:-1]])
    mins = np.minimum.reduceat(sv, starts)
    keys = si[starts]
    out[keys] = np.minimum(out[keys], mins)


class _SlabEvaluator:
    """Values of a polynomial on axis-0 slabs of the tensor corner grid.

    Exploits the product structure: on the slab x0 = axis[i0] the corner
    values are T @ M(i0) @ T^T, where T is the per-axis power table and
    M(i0)[b, c] = sum_a coef[a,b,c] x0^a is a tiny matrix.  Two thin matmuls
    per slab replace a per-term power over every corner, which is what makes
    resolution-512 sweeps in three variables affordable.  Falls back to
    pointwise evaluation above three variables.
    """

    def __init__(self, p: MultiPoly, axis: np.ndarray):
        self.p = p
        self.n = p.dimension
        self.axis = np.asarray(axis, dtype=float)
        d = max((max(e) for e in p.terms), default=0)
        self.T = np.vander(self.axis, d + 1, increasing=True)
        self.width = d + 1
        self.items = list(p.terms.items())

    def values(self, i0: int) -> np.ndarray:
        t0 = self.T[i0]
        if self.n == 1:
            return np.array([sum(c * t0[e[0]] for e, c in self.items)])
        if self.n == 2:
            m = np.zeros(self.width)
            for e, c in self.items:
                m[e[1]] += c * t0[e[0]]
            return self.T @ m
        if self.n == 3:
            M = np.zeros((self.width, self.width))
            for e, c in self.items:
                M[e[1], e[2]] += c * t0[e[0]]
            return ((self.T @ M) @ self.T.T).ravel()
        pts = np.empty((self.axis.size ** (self.n - 1), self.n))
        rest = np.meshgrid(*([self.axis] * (self.n - 1)), indexing="ij")
        pts[:, 0] = self.axis[i0]
        for k, g in enumerate(rest):
            pts[:, k + 1] = g.ravel()
        return self.p.evaluate_many(pts)


class TransversalityGrid:
    """Corner sweep of (|P|, ||dP||) over a pair's ball, one axis slab at a
    time (the full corner set is never materialised, so n = 3 at resolution
    512 stays in memory).  One sweep answers a whole family of thresholds:
    for each requested s it returns the exact minimum of ||dP|| over inside
    corners with |P| < s, plus the minimum of |P| over the one-cell boundary
    shell.
    """

    def __init__(self, pair: RegularPair, resolution: int = 256):
        if resolution < 8:
            raise ValueError("resolution too small")
        self.pair = pair
        self.resolution = int(resolution)
        n = pair.dimension
        R = pair.domain.radius
        if any(c != 0.0 for c in pair.domain.center):
            raise ValueError("verification assumes a ball centred at 0")
        self.axis = np.linspace(-R, R, self.resolution + 1)
        self.h = self.axis[1] - self.axis[0]
        self.cover = 0.5 * self.h * math.sqrt(n)
        p = pair.polynomial
        self._partials = [p.partial(k) for k in range(n)]
        self.lip_value = math.sqrt(
            sum(_coef_sup(q, R) ** 2 for q in self._partials)
        )
        self.lip_gradient = math.sqrt(
            sum(
                _coef_sup(self._partials[k].partial(l), R) ** 2
                for k in range(n)
                for l in range(n)
            )
        )
        self.pad_value = self.lip_value * self.cover
        self.pad_gradient = self.lip_gradient * self.cover
        self._ev_poly = _SlabEvaluator(p, self.axis)
        self._ev_parts = [_SlabEvaluator(q, self.axis) for q in self._partials]

    # -- slab machinery ----------------------------------------------------
    def _plane_template(self):
        n = self.pair.dimension
        if n == 1:
            return np.zeros((1, 1)), (1,)
        rest = np.meshgrid(*([self.axis] * (n - 1)), indexing="ij")
        shape = rest[0].shape
        pts = np.empty((rest[0].size, n))
        for k, g in enumerate(rest):
            pts[:, k + 1] = g.ravel()
        return pts, shape

    @staticmethod
    def _dilate(mask: np.ndarray) -> np.ndarray:
        if mask.ndim == 0 or mask.size == 1:
            return mask
        if mask.all():
            return mask
        return ndimage.binary_dilation(
            mask, structure=np.ones((3,) * mask.ndim, dtype=bool)
        )

    def sweep(self, thresholds: np.ndarray):
        """Returns (shell_min_absP, band_min_grad) with band_min_grad[k] the
        exact min of ||dP|| over inside corners having |P| < thresholds[k]
        (thresholds ascending)."""
        ts = np.asarray(thresholds, dtype=float)
        if ts.size and np.any(np.diff(ts) < 0):
            raise ValueError("thresholds must be ascending")
        n = self.pair.dimension
        res = self.resolution
        R = self.pair.domain.radius
        pts, pshape = self._plane_template()
        r2rest = (pts[:, 1:] ** 2).sum(axis=1)

        group_min = np.full(ts.size + 1, math.inf)
        shell_min = math.inf
        all_out = np.ones(pshape, dtype=bool)
        all_out_d = all_out

        def slab(i0):
            x0 = self.axis[i0]
            inside = r2rest + x0 * x0 < R * R
            absP = np.abs(self._ev_poly.values(i0))
            g2 = np.zeros(absP.shape)
            for ev in self._ev_parts:
                g2 += ev.values(i0) ** 2
            return inside, absP, np.sqrt(g2)

        prev_out_d = all_out_d
        cur = slab(0)
        cur_out_d = self._dilate(~cur[0].reshape(pshape))
        for i0 in range(res + 1):
            if i0 + 1 <= res:
                nxt = slab(i0 + 1)
                nxt_out_d = self._dilate(~nxt[0].reshape(pshape))
            else:
                nxt = None
                nxt_out_d = all_out_d
            inside, absP, grad = cur
            near_out = (prev_out_d | cur_out_d | nxt_out_d).ravel()
            shell = inside & near_out
            if shell.any():
                shell_min = min(shell_min, float(absP[shell].min()))
            if inside.any() and ts.size:
                grp = np.searchsorted(ts, absP[inside], side="right")
                _group_min(grp, grad[inside], group_min)
            if nxt is None:
                break
            prev_out_d = cur_out_d
            cur, cur_out_d = nxt, nxt_out_d

        band = np.minimum.accumulate(group_min[:-1]) if ts.size else group_min[:0]
        return shell_min, band

    # -- witnesses ----------------------------------------------------------
    def family_witnesses(self, pairs_de) -> list:
        """Witnesses for a list of (delta, epsilon) pairs from a single sweep."""
        des = [(float(d), float(e)) for d, e in pairs_de]
        thresholds = np.unique(
            np.array(
                [d for d, _ in des] + [d + self.pad_value for d, _ in des]
            )
        )
        shell_min, band = self.sweep(thresholds)
        out = []
        for d, e in des:
            k = int(np.searchsorted(thresholds, d))
            kp = int(np.searchsorted(thresholds, d + self.pad_value))
            c1 = shell_min - d
            c2 = band[k] - e
            c1p = shell_min - self.pad_value - d
            c2p = band[kp] - self.pad_gradient - e
            out.append(
                TransversalityWitness(
                    delta=d,
                    epsilon=e,
                    grid_resolution=self.resolution,
                    verified=bool(c1 > 0 and c2 > 0),
                    worst_margin=float(min(c1p, c2p)),
                )
            )
        return out

    def verify(self, delta: float, epsilon: float) -> TransversalityWitness:
        return self.family_witnesses([(delta, epsilon)])[0]


def verify_transversality(
    pair: RegularPair, delta: float, epsilon: float, resolution: int = 256
) -> TransversalityWitness:
    """Grid check of both regularity clauses for one (delta, epsilon)."""
    return TransversalityGrid(pair, resolution).verify(delta, epsilon)


# ---------------------------------------------------------------------------
# stability under admissible perturbations
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class StabilityOutcome:
    unchanged: bool
    base: ComponentReport
    perturbed: ComponentReport


def _padded_sup(p: MultiPoly, R: float, resolution: int) -> float:
    """Upper bound for sup |p| over the ball of radius R (corner max plus
    Lipschitz padding over the bounding box)."""
    n = p.dimension
    axis = np.linspace(-R, R, resolution + 1)
    if n == 1:
        vals = np.abs(p.evaluate_many(axis[:, None]))
    elif n == 2:
        vals = np.abs(p.on_grid(axis, axis))
    else:
        raise ValueError("padded sup implemented for n <= 2")
    lip = math.sqrt(sum(_coef_sup(p.partial(k), R) ** 2 for k in range(n)))
    h = axis[1] - axis[0]
    return float(vals.max()) + lip * 0.5 * h * math.sqrt(n)


def perturbation_budget(p: MultiPoly, R: float, resolution: int = 128) -> tuple:
    """(sup |g|, sup ||dg||) upper bounds used by stability_check."""
    n = p.dimension
    sup_g = _padded_sup(p, R, resolution)
    sup_dg = 0.0
    for k in range(n):
        sup_dg += _padded_sup(p.partial(k), R, resolution) ** 2
    return sup_g, math.sqrt(sup_dg)


def stability_check(
    pair: RegularPair,
    delta: float,
    epsilon: float,
    perturbation: MultiPoly,
    resolution: int = 256,
    max_depth: int = 3,
) -> StabilityOutcome:
    """Component count of {P = 0} vs {P + g = 0} for an admissible g.

    Admissible means the certified bounds sup |g| < delta and
    sup ||dg|| < epsilon over the pair's ball; a perturbation breaking the
    budget raises ValueError rather than being tested.  Planar pairs only.
    """
    if pair.dimension != 2:
        raise ValueError("stability_check counts components in the plane")
    if perturbation.dimension != 2:
        raise ValueError("perturbation must live on the same plane")
    sup_g, sup_dg = perturbation_budget(perturbation, pair.domain.radius)
    if sup_g >= delta or sup_dg >= epsilon:
        raise ValueError(
            "perturbation exceeds the admissible budget: sup|g|=%.3g (< %.3g "
            "needed), sup|dg|=%.3g (< %.3g needed)" % (sup_g, delta, sup_dg, epsilon)
        )
    base = grid_components(pair.polynomial, pair.domain, resolution, max_depth)
    pert = grid_components(
        pair.polynomial + perturbation, pair.domain, resolution, max_depth
    )
    unchanged = (
        base.count == pert.count
        and base.touching_boundary == pert.touching_boundary
    )
    return StabilityOutcome(unchanged, base, pert)


# ---------------------------------------------------------------------------
# rescaling check
# ---------------------------------------------------------------------------
def barrier_rescale_check(
    pair: RegularPair, d: int, delta: float, epsilon: float, resolution: int = 256
) -> bool:
    """Check the rescaled regularity implication at frequency d.

    With sigma(y) = d^{n/2} P(sqrt(d) y) on the shrunken ball of radius
    R/sqrt(d), every grid corner must satisfy: |sigma| < (delta/2) d^{n/2}
    implies ||d sigma|| > (epsilon/2) d^{(n+1)/2}.
    """
    if d < 1:
        raise ValueError("d must be a positive integer")
    n = pair.dimension
    R = pair.domain.radius
    s = math.sqrt(d)
    grid = TransversalityGrid(pair, resolution)  # reuse slab template
    axis = np.linspace(-R / s, R / s, resolution + 1)
    pts, pshape = grid._plane_template()
    # rebuild the plane template on the shrunken axis
    if n > 1:
        rest = np.meshgrid(*([axis] * (n - 1)), indexing="ij")
        for k, g in enumerate(rest):
            pts[:, k + 1] = g.ravel()
    r2rest = (pts[:, 1:] ** 2).sum(axis=1)
    scale_v = d ** (n / 2.0)
    scale_g = d ** ((n + 1) / 2.0)
    lim_v = 0.5 * delta * scale_v
    lim_g = 0.5 * epsilon * scale_g
    poly = pair.polynomial
    parts = grid._partials
    for i0 in range(resolution + 1):
        x0 = axis[i0]
        inside = r2rest + x0 * x0 < (R / s) ** 2
        if not inside.any():
            continue
        pts[:, 0] = x0
        xs = pts[inside] * s
        sig = scale_v * poly.evaluate_many(xs)
        g2 = np.zeros(sig.shape)
        for q in parts:
            g2 += q.evaluate_many(xs) ** 2
        gsig = scale_g * np.sqrt(g2)
        bad = (np.abs(sig) < lim_v) & (gsig <= lim_g)
        if bad.any():
            return False
    return True
