"""Seeded Gaussian polynomial ensembles.

Two models are provided:

* homogeneous degree-d polynomials in n+1 variables whose monomial
  coefficients are independent centred normals with variance d!/alpha!
  (orthogonally invariant; two-point covariance <x, y>^d), and
* the translation-invariant Gaussian analytic field on R^n obtained by
  putting i.i.d. standard normals on the weighted monomials
  sqrt(pi^|I|/I!) x^I, truncated at a total degree D chosen so the
  discarded variance is negligible on the working ball
  (covariance e^{pi <x, y>}).

Sampling is reproducible: sample `index` under a given spec is a pure
function of (seed, model parameters, index), never of how many samples were
drawn before it or of the worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import streams
from .constants import MonteCarloEstimate
from .polycore import MultiPoly, fock_basis_weight

_TAG_KOSTLAN = streams.stream_tag("kostlan")
_TAG_FOCK = streams.stream_tag("fock")


def homogeneous_indices(nvars: int, degree: int) -> list:
    """All exponent tuples with |alpha| = degree, in lexicographic order."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for e in range(remaining + 1):
            rec(prefix + (e,), remaining - e, slots - 1)

    rec((), degree, nvars)
    return sorted(out)


def indices_up_to(nvars: int, degree: int) -> list:
    """All exponent tuples with |I| <= degree, in lexicographic order."""
    out = []
    for d in range(degree + 1):
        out.extend(homogeneous_indices(nvars, d))
    return sorted(out)


def fock_truncation_degree(radius: float, rel_tol: float = 1e-6) -> int:
    """Smallest D whose discarded series variance on |x| <= radius is below
    rel_tol times the full variance e^{pi radius^2}.

    The variance of the degree-k layer at radius r is (pi r^2)^k / k!.
    """
    lam = math.pi * radius * radius
    target = rel_tol * math.exp(lam)
    D = max(int(math.ceil(lam)), 1)
    while True:
        # once lam < D+2 the tail is dominated by a geometric series
        t_next = math.exp((D + 1) * math.log(lam) - math.lgamma(D + 2))
        ratio = lam / (D + 2)
        if ratio < 1.0 and t_next / (1.0 - ratio) < target:
            return D
        D += 1


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------
def sample_kostlan(n: int, d: int, seed: int, index: int = 0) -> MultiPoly:
    """Sample a homogeneous degree-d polynomial in n+1 variables.

    Coefficient of x^alpha is a_alpha * sqrt(d!/alpha!) with a_alpha i.i.d.
    standard normal; the coefficient stream order is the lexicographic order
    of alpha and the stream is keyed by (seed, n, d, index).
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    idxs = homogeneous_indices(n + 1, d)
    gen = streams.generator(seed, _TAG_KOSTLAN, n, d, index)
    a = streams.normals(gen, len(idxs))
    log_dfact = math.lgamma(d + 1)
    terms = {}
    for k, alpha in enumerate(idxs):
        w = math.exp(0.5 * (log_dfact - sum(math.lgamma(e + 1) for e in alpha)))
        terms[alpha] = a[k] * w
    return MultiPoly(n + 1, terms)


def kostlan_binary_diagonals(
    d: int, seed: int, start: int, count: int
) -> np.ndarray:
    """Coefficient diagonals of sample_kostlan(1, d, seed, index) for index
    in [start, start+count), one row per sample.

    Row j entry k multiplies x0^k x1^(d-k) and is bit-identical to the
    corresponding coefficient of sample_kostlan — same stream key, same lex
    draw order — just without the dict and weight recomputation per sample.
    """
    if d < 1:
        raise ValueError("d must be positive")
    log_dfact = math.lgamma(d + 1)
    # same association and exp as the generic sampler so the product rounds
    # to the identical bit pattern
    w = np.array(
        [
            math.exp(
                0.5 * (log_dfact - sum(math.lgamma(e + 1) for e in (k, d - k)))
            )
            for k in range(d + 1)
        ]
    )
    out = np.empty((count, d + 1))
    for j in range(count):
        gen = streams.generator(seed, _TAG_KOSTLAN, 1, d, start + j)
        out[j] = streams.normals(gen, d + 1) * w
    return out


class FockField:
    """A truncated random analytic field sum_I a_I sqrt(pi^|I|/I!) x^I.

    `coefficients` maps multi-indices to the raw standard normals a_I; the
    orthonormalising weights are applied at evaluation time.  Dimension 1 and
    2 get dense tensor evaluation paths for grid work.
    """

    def __init__(self, n: int, truncation: int, coefficients: dict):
        self.n = int(n)
        self.truncation = int(truncation)
        self.coefficients = dict(coefficients)
        self._dense = None

    # dense coefficient tensor, including weights (n <= 2)
    def _dense_coefs(self) -> np.ndarray:
        if self._dense is None:
            D = self.truncation
            if self.n == 1:
                c = np.zeros(D + 1)
                for (i,), a in self.coefficients.items():
                    c[i] = a * fock_basis_weight((i,))
            elif self.n == 2:
                c = np.zeros((D + 1, D + 1))
                for (i, j), a in self.coefficients.items():
                    c[i, j] = a * fock_basis_weight((i, j))
            else:
                raise ValueError("dense evaluation supports n <= 2")
            self._dense = c
        return self._dense

    def as_multipoly(self) -> MultiPoly:
        return MultiPoly(
            self.n,
            {I: a * fock_basis_weight(I) for I, a in self.coefficients.items()},
        )

    # ------------------------------------------------------------------
    def at_points(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if self.n == 1:
            c = self._dense_coefs()
            return np.polyval(c[::-1], pts[:, 0])
        if self.n == 2:
            c = self._dense_coefs()
            vx = np.vander(pts[:, 0], self.truncation + 1, increasing=True)
            vy = np.vander(pts[:, 1], self.truncation + 1, increasing=True)
            return ((vx @ c) * vy).sum(axis=1)
        return self.as_multipoly().evaluate_many(pts)

    def on_grid(self, xs, ys) -> np.ndarray:
        if self.n != 2:
            raise ValueError("on_grid needs a 2-dimensional field")
        c = self._dense_coefs()
        vx = np.vander(np.asarray(xs, dtype=float), self.truncation + 1, increasing=True)
        vy = np.vander(np.asarray(ys, dtype=float), self.truncation + 1, increasing=True)
        return vx @ c @ vy.T

    def _partial_dense(self, axis: int) -> np.ndarray:
        c = self._dense_coefs()
        D = self.truncation
        out = np.zeros_like(c)
        k = np.arange(1, D + 1)
        if self.n == 1:
            out[: D] = c[1:] * k
            return out
        if axis == 0:
            out[: D, :] = c[1:, :] * k[:, None]
        else:
            out[:, : D] = c[:, 1:] * k[None, :]
        return out

    def grad_norm_on_grid(self, xs, ys) -> np.ndarray:
        if self.n != 2:
            raise ValueError("grad_norm_on_grid needs n = 2")
        vx = np.vander(np.asarray(xs, dtype=float), self.truncation + 1, increasing=True)
        vy = np.vander(np.asarray(ys, dtype=float), self.truncation + 1, increasing=True)
        gx = vx @ self._partial_dense(0) @ vy.T
        gy = vx @ self._partial_dense(1) @ vy.T
        return np.hypot(gx, gy)

    def gradient_at_points(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if self.n == 1:
            c = self._partial_dense(0)
            return np.polyval(c[::-1], pts[:, 0])[:, None]
        if self.n == 2:
            vx = np.vander(pts[:, 0], self.truncation + 1, increasing=True)
            vy = np.vander(pts[:, 1], self.truncation + 1, increasing=True)
            gx = ((vx @ self._partial_dense(0)) * vy).sum(axis=1)
            gy = ((vx @ self._partial_dense(1)) * vy).sum(axis=1)
            return np.stack([gx, gy], axis=1)
        p = self.as_multipoly()
        return np.stack(
            [p.partial(k).evaluate_many(pts) for k in range(self.n)], axis=1
        )


def sample_fock(n: int, truncation: int, seed: int, index: int = 0) -> FockField:
    """Sample the truncated analytic field; stream keyed by (seed, n, D, index)."""
    if n < 1 or truncation < 0:
        raise ValueError("need n >= 1 and truncation >= 0")
    idxs = indices_up_to(n, truncation)
    gen = streams.generator(seed, _TAG_FOCK, n, truncation, index)
    a = streams.normals(gen, len(idxs))
    return FockField(n, truncation, dict(zip(idxs, a)))


# ---------------------------------------------------------------------------
# sample specs and serialization
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GaussianSampleSpec:
    """Which ensemble to draw from: model 'kostlan' (degree) or 'fock'
    (truncation degree), with dimension and a 64-bit master seed."""

    model: str
    n: int
    degree: int
    seed: int

    def __post_init__(self):
        if self.model not in ("kostlan", "fock"):
            raise ValueError("model must be 'kostlan' or 'fock'")
        if self.n < 1 or self.degree < 0:
            raise ValueError("bad dimension or degree")

    def indices(self) -> list:
        if self.model == "kostlan":
            return homogeneous_indices(self.n + 1, self.degree)
        return indices_up_to(self.n, self.degree)

    def weights(self) -> np.ndarray:
        if self.model == "kostlan":
            logd = math.lgamma(self.degree + 1)
            return np.array(
                [
                    math.exp(0.5 * (logd - sum(math.lgamma(e + 1) for e in a)))
                    for a in self.indices()
                ]
            )
        return np.array([fock_basis_weight(i) for i in self.indices()])

    def sample(self, index: int = 0):
        if self.model == "kostlan":
            return sample_kostlan(self.n, self.degree, self.seed, index)
        return sample_fock(self.n, self.degree, self.seed, index)

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "n": self.n,
            "degree": self.degree,
            "seed": self.seed,
        }


def sample_to_json_dict(spec: GaussianSampleSpec, index: int = 0) -> dict:
    """Serialize one sample as a polynomial plus a spec header."""
    s = spec.sample(index)
    poly = s if isinstance(s, MultiPoly) else s.as_multipoly()
    return {"spec": {**spec.to_json_dict(), "index": index}, "poly": poly.to_json_dict()}


def _monomial_values(spec: GaussianSampleSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    idxs = spec.indices()
    w = spec.weights()
    vals = np.empty(len(idxs))
    for k, alpha in enumerate(idxs):
        m = 1.0
        for xk, e in zip(x, alpha):
            if e:
                m *= xk**e
        vals[k] = m
    return w * vals


def covariance_probe(
    spec: GaussianSampleSpec, x, y, samples: int, threads: int = 1
) -> MonteCarloEstimate:
    """Monte-Carlo estimate of E f(x) f(y) under the spec's ensemble.

    Uses the same per-index streams as spec.sample, so the estimate is a
    deterministic function of (spec, samples).
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    vx = _monomial_values(spec, x)
    vy = _monomial_values(spec, y)
    ncoef = vx.size
    tag = _TAG_KOSTLAN if spec.model == "kostlan" else _TAG_FOCK

    def block(start: int, count: int):
        rows = np.empty((count, ncoef))
        for r in range(count):
            gen = streams.generator(spec.seed, tag, spec.n, spec.degree, start + r)
            rows[r] = streams.normals(gen, ncoef)
        prods = (rows @ vx) * (rows @ vy)
        return float(prods.sum()), float((prods * prods).sum())

    parts = streams.run_blocks(samples, block, threads=threads)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    return MonteCarloEstimate(mean, math.sqrt(var / samples), samples)
