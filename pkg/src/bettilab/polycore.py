"""Sparse multivariate real polynomials and a Gaussian-weighted L2 norm.

A polynomial is a map from exponent multi-indices (tuples of naturals, one
entry per variable) to real coefficients.  The weighted norm implemented by
`fock_norm_sq` gives the monomial x^I squared length I!/pi^|I|, which makes
the rescaled monomials sqrt(pi^|I|/I!) x^I an orthonormal family; the same
weights drive the random analytic series sampled in `ensembles`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

LOG_PI = math.log(math.pi)


def _validate_terms(dimension: int, terms: dict) -> dict:
    clean = {}
    for exps, coef in terms.items():
        exps = tuple(int(e) for e in exps)
        if len(exps) != dimension:
            raise ValueError(
                f"exponent tuple {exps} has length {len(exps)}, expected {dimension}"
            )
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        c = float(coef)
        if c != 0.0:
            clean[exps] = clean.get(exps, 0.0) + c
    return {e: c for e, c in clean.items() if c != 0.0}


@dataclass
class MultiPoly:
    """Sparse polynomial: `terms` maps exponent tuples to coefficients.

    Treated as immutable after construction; all operations return new
    instances, so instances can be shared freely across worker threads.
    """

    dimension: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.terms = _validate_terms(self.dimension, self.terms)

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.dimension},)")
        total = 0.0
        for exps, c in self.terms.items():
            m = c
            for xk, e in zip(x, exps):
                if e:
                    m *= xk**e
            total += m
        return float(total)

    __call__ = evaluate

    def evaluate_many(self, points) -> np.ndarray:
        """Values at an (m, dimension) array of points."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None] if self.dimension == 1 else pts[None, :]
        if pts.shape[1] != self.dimension:
            raise ValueError(
                f"points have {pts.shape[1]} coordinates, expected {self.dimension}"
            )
        if not self.terms:
            return np.zeros(pts.shape[0])
        E = np.array(list(self.terms.keys()), dtype=np.int64)
        C = np.array(list(self.terms.values()))
        out = np.empty(pts.shape[0])
        # per-variable power tables + gathered products, chunked for memory
        step = max(1, int(4e6) // max(1, E.shape[0]))
        for lo in range(0, pts.shape[0], step):
            chunk = pts[lo : lo + step]
            acc = np.tile(C, (chunk.shape[0], 1))
            for k in range(self.dimension):
                tab = np.vander(chunk[:, k], int(E[:, k].max()) + 1, increasing=True)
                acc *= tab[:, E[:, k]]
            out[lo : lo + step] = acc.sum(axis=1)
        return out

    def on_grid(self, xs, ys) -> np.ndarray:
        """Tensor-grid values for dimension-2 polynomials: out[i, j] = p(xs[i], ys[j])."""
        if self.dimension != 2:
            raise ValueError("on_grid needs a 2-variable polynomial")
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        out = np.zeros((xs.size, ys.size))
        for (i, j), c in self.terms.items():
            out += c * np.outer(xs**i, ys**j)
        return out

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = np.zeros(self.dimension)
        for k in range(self.dimension):
            g[k] = self.partial(k).evaluate(x)
        return g

    def partial(self, k: int) -> "MultiPoly":
        """Derivative with respect to variable k."""
        terms = {}
        for exps, c in self.terms.items():
            e = exps[k]
            if e == 0:
                continue
            new = list(exps)
            new[k] = e - 1
            key = tuple(new)
            terms[key] = terms.get(key, 0.0) + c * e
        return MultiPoly(self.dimension, terms)

    # ------------------------------------------------------------------
    # algebra
    # ------------------------------------------------------------------
    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if other.dimension != self.dimension:
            raise ValueError("dimension mismatch")
        terms = dict(self.terms)
        for exps, c in other.terms.items():
            terms[exps] = terms.get(exps, 0.0) + c
        return MultiPoly(self.dimension, terms)

    def scale(self, c: float) -> "MultiPoly":
        return MultiPoly(self.dimension, {e: c * v for e, v in self.terms.items()})

    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def sup_bound_on_ball(self, radius: float) -> float:
        """Coefficient bound for sup |p| over the origin ball: sum |c| r^|I|."""
        r = float(radius)
        return float(sum(abs(c) * r ** sum(e) for e, c in self.terms.items()))

    def univariate_coeffs(self) -> np.ndarray:
        """Ascending coefficient array for dimension-1 polynomials."""
        if self.dimension != 1:
            raise ValueError("univariate_coeffs needs a 1-variable polynomial")
        d = self.degree()
        coeffs = np.zeros(d + 1)
        for (e,), c in self.terms.items():
            coeffs[e] = c
        return coeffs

    def dehomogenize(self, chart: int = 1) -> "MultiPoly":
        """Set variable `chart` to 1 (binary forms -> univariate in the other)."""
        if self.dimension != 2:
            raise ValueError("dehomogenize implemented for binary forms only")
        keep = 1 - chart
        terms = {}
        for exps, c in self.terms.items():
            key = (exps[keep],)
            terms[key] = terms.get(key, 0.0) + c
        return MultiPoly(1, terms)

    # ------------------------------------------------------------------
    # serialization: {"dim": n, "terms": [{"exp": [..], "coef": c}, ...]}
    # ------------------------------------------------------------------
    def to_json_dict(self) -> dict:
        return {
            "dim": self.dimension,
            "terms": [
                {"exp": list(e), "coef": c} for e, c in sorted(self.terms.items())
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, data: dict) -> "MultiPoly":
        terms = {tuple(t["exp"]): t["coef"] for t in data["terms"]}
        return cls(int(data["dim"]), terms)

    @classmethod
    def from_json(cls, text: str) -> "MultiPoly":
        return cls.from_json_dict(json.loads(text))


def constant(dimension: int, value: float) -> MultiPoly:
    return MultiPoly(dimension, {(0,) * dimension: value})


def fock_basis_weight(index) -> float:
    """sqrt(pi^|I| / I!): the normalising weight of the monomial x^I.

    Uses log-gamma so large indices stay exact to double precision.
    """
    idx = tuple(int(e) for e in index)
    if any(e < 0 for e in idx):
        raise ValueError("multi-index entries must be nonnegative")
    total = sum(idx)
    log_w = 0.5 * (total * LOG_PI - sum(math.lgamma(e + 1) for e in idx))
    return math.exp(log_w)


def fock_norm_sq(p: MultiPoly) -> float:
    """Weighted squared norm sum |c_I|^2 * I! / pi^|I| of a polynomial."""
    total = 0.0
    for exps, c in p.terms.items():
        log_w = sum(math.lgamma(e + 1) for e in exps) - sum(exps) * LOG_PI
        total += c * c * math.exp(log_w)
    return float(total)
