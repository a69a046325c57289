"""Explicit constants controlling expected component counts, in log arithmetic.

The quantities here multiply out to double-exponentially small numbers (the
final per-topology constants behave like exp(-2*exp(70 n))), so everything is
carried as a sign plus a natural-log magnitude (`LogReal`) and the scalar
optimisations run directly on log values.

Pipeline, in dependency order:

    f_tau / m_tau     tail score of a shifted Gaussian barrier and its max,
    g_R / rho_R       growth factor of the local sup-norm comparison,
    tau_pair          variance budget of a regular pair (domain, polynomial),
    c_sigma_lower     the resulting per-topology lower-bound constant,
    e_R_constant      Monte Carlo value of the signed-determinant integral
                      over symmetric matrices with prescribed signature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcx

from . import streams

SQRT_PI = math.sqrt(math.pi)
LOG_2 = math.log(2.0)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# sign + log-magnitude arithmetic
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class LogReal:
    """A real number stored as sign in {-1, 0, +1} and ln |x|.

    Multiplication and division are exact log-domain additions; addition uses
    log-sum-exp.  Zero is (sign=0, log=-inf).
    """

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        if self.sign == 0 and self.log_magnitude != -math.inf:
            object.__setattr__(self, "log_magnitude", -math.inf)

    # construction ------------------------------------------------------
    @classmethod
    def from_float(cls, x: float) -> "LogReal":
        x = float(x)
        if x == 0.0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_log(cls, log_magnitude: float, sign: int = 1) -> "LogReal":
        if log_magnitude == -math.inf:
            return cls(0, -math.inf)
        return cls(sign, float(log_magnitude))

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(0, -math.inf)

    @classmethod
    def one(cls) -> "LogReal":
        return cls(1, 0.0)

    # conversions -------------------------------------------------------
    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log_magnitude > 709.0:
            return math.inf * self.sign
        return self.sign * math.exp(self.log_magnitude)

    def ln(self) -> float:
        if self.sign <= 0:
            raise ValueError("ln of a nonpositive LogReal")
        return self.log_magnitude

    def loglog_neg(self) -> float:
        """ln(-ln x) for x in (0, 1): how many e-folds below 1 the value sits."""
        if self.sign <= 0 or self.log_magnitude >= 0.0:
            raise ValueError("loglog_neg needs a value in (0, 1)")
        return math.log(-self.log_magnitude)

    # algebra -----------------------------------------------------------
    def __mul__(self, other: "LogReal") -> "LogReal":
        if self.sign == 0 or other.sign == 0:
            return LogReal.zero()
        return LogReal(self.sign * other.sign, self.log_magnitude + other.log_magnitude)

    def __truediv__(self, other: "LogReal") -> "LogReal":
        if other.sign == 0:
            raise ZeroDivisionError("LogReal division by zero")
        if self.sign == 0:
            return LogReal.zero()
        return LogReal(self.sign * other.sign, self.log_magnitude - other.log_magnitude)

    def __neg__(self) -> "LogReal":
        return LogReal(-self.sign, self.log_magnitude)

    def __add__(self, other: "LogReal") -> "LogReal":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        if self.sign == other.sign:
            return LogReal(self.sign, np.logaddexp(self.log_magnitude, other.log_magnitude))
        # opposite signs: subtract the smaller magnitude from the larger
        if self.log_magnitude == other.log_magnitude:
            return LogReal.zero()
        big, small = (self, other) if self.log_magnitude > other.log_magnitude else (other, self)
        diff = small.log_magnitude - big.log_magnitude
        return LogReal(big.sign, big.log_magnitude + math.log1p(-math.exp(diff)))

    def __sub__(self, other: "LogReal") -> "LogReal":
        return self + (-other)

    def __pow__(self, k: int) -> "LogReal":
        k = int(k)
        if self.sign == 0:
            return LogReal.one() if k == 0 else LogReal.zero()
        sign = self.sign if k % 2 else 1
        return LogReal(sign, self.log_magnitude * k)

    # order -------------------------------------------------------------
    def _key(self):
        # sign-major order; for negatives a larger magnitude is smaller
        return (self.sign, self.sign * self.log_magnitude if self.sign else 0.0)

    def __lt__(self, other: "LogReal") -> bool:
        return self._key() < other._key()

    def __le__(self, other: "LogReal") -> bool:
        return self._key() <= other._key()

    def __gt__(self, other: "LogReal") -> bool:
        return self._key() > other._key()

    def __ge__(self, other: "LogReal") -> bool:
        return self._key() >= other._key()

    def to_json_dict(self) -> dict:
        return {"sign": self.sign, "log": self.log_magnitude}


@dataclass(frozen=True)
class ExtremumResult:
    """Outcome of a one-dimensional extremum search."""

    argument: float
    value: LogReal
    bracket: tuple
    iterations: int


# ---------------------------------------------------------------------------
# scalar optimisation: dense scan + golden-section refinement
# ---------------------------------------------------------------------------
def _golden_min(fn, a: float, b: float, tol: float):
    """Golden-section minimum of fn on [a, b]; returns (x, fx, iterations).

    Tracks the best value ever evaluated so the reported minimum is never
    worse than any probe (that monotonicity is what the inequality checks
    downstream rely on).
    """
    best_x, best_f = a, fn(a)
    for x in (b,):
        fx = fn(x)
        if fx < best_f:
            best_x, best_f = x, fx
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    iters = 0
    while (b - a) > tol and iters < 400:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fn(x2)
        iters += 1
    for x, fx in ((x1, f1), (x2, f2)):
        if fx < best_f:
            best_x, best_f = x, fx
    return best_x, best_f, iters, (a, b)


def _scan_then_golden_min(fn, xs, tol: float):
    """Dense scan over the probe points xs, then local golden refinement."""
    vals = [fn(x) for x in xs]
    k = int(np.argmin(vals))
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, len(xs) - 1)]
    x, fx, iters, bracket = _golden_min(fn, lo, hi, tol)
    if vals[k] < fx:
        x, fx = xs[k], vals[k]
    return x, fx, iters + len(xs), bracket


# ---------------------------------------------------------------------------
# tail score and its maximum
# ---------------------------------------------------------------------------
def log_erfc(a: float) -> float:
    """ln erfc(a), stable for large positive a via erfc(a) = erfcx(a) e^{-a^2}."""
    if a <= 0.0:
        return math.log(erfc(a))
    return math.log(erfcx(a)) - a * a


def f_tau(tau: float, a: float) -> float:
    """Tail score (1 - tau/a^2) * (1/sqrt(pi)) * int_a^inf e^{-t^2} dt.

    Equals 0.5 * (1 - tau/a^2) * erfc(a).  Nonnegative for a >= sqrt(tau),
    zero at a = sqrt(tau), and decays like e^{-a^2} as a grows.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if a <= 0:
        raise ValueError("a must be positive")
    return 0.5 * (1.0 - tau / (a * a)) * erfc(a)


def f_tau_log(tau: float, a: float) -> LogReal:
    """f_tau as a LogReal; usable far past double-precision underflow."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if a <= 0:
        raise ValueError("a must be positive")
    u = a * a - tau
    if u == 0.0:
        return LogReal.zero()
    sign = 1 if u > 0 else -1
    return LogReal.from_log(
        math.log(abs(u)) - math.log(a * a) - LOG_2 + log_erfc(a), sign
    )


def _log_f_tau_of_u(tau: float, u: float) -> float:
    # ln f_tau at a = sqrt(tau + u); u in (0, 1].  Splitting off u keeps the
    # argument resolvable even when tau is so large that sqrt(tau) and
    # sqrt(tau + 1) collide in double precision.
    a = math.sqrt(tau + u)
    return math.log(u) - math.log(tau + u) - LOG_2 + log_erfc(a)


def m_tau(tau: float, scan_points: int = 1000, tol: float = 1e-10) -> ExtremumResult:
    """Maximum of f_tau over [sqrt(tau), sqrt(tau + 1)].

    The maximiser of f_tau over [sqrt(tau), inf) lies in that window, so the
    search is parametrised by u = a^2 - tau in (0, 1]: a dense scan (f_tau is
    not proven unimodal) followed by golden-section refinement.  The value is
    returned as a LogReal: for tau = 1e6 it is around e^{-1e6}.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    us = np.linspace(1.0 / scan_points, 1.0, scan_points)
    u, neg_log_f, iters, (ua, ub) = _scan_then_golden_min(
        lambda v: -_log_f_tau_of_u(tau, v), us, tol
    )
    argument = math.sqrt(tau + u)
    lo = min(math.sqrt(tau + max(ua, 0.0)), argument)
    hi = max(math.sqrt(tau + ub), argument)
    return ExtremumResult(argument, LogReal.from_log(-neg_log_f), (lo, hi), iters)


# ---------------------------------------------------------------------------
# sup-norm growth factor and its infimum
# ---------------------------------------------------------------------------
def g_R(R: float, n: int, s: float) -> LogReal:
    """((R+s)^{2n} / s^{2n}) * e^{pi (R+s)^2}, evaluated in the log domain."""
    if R <= 0 or s <= 0:
        raise ValueError("R and s must be positive")
    log_val = 2 * n * (math.log(R + s) - math.log(s)) + math.pi * (R + s) ** 2
    return LogReal.from_log(log_val)


def rho_R(R: float, n: int, tol: float = 1e-10) -> ExtremumResult:
    """Infimum of g_R over s > 0 (a single interior minimum).

    Brackets by doubling/halving away from s = R, then golden-section.  The
    value never exceeds g_R at s = R, i.e. 4^n e^{4 pi R^2}.
    """

    def log_g(s: float) -> float:
        return 2 * n * (math.log(R + s) - math.log(s)) + math.pi * (R + s) ** 2

    lo = hi = R
    f_lo = f_hi = log_g(R)
    while log_g(lo / 2) < f_lo:
        lo /= 2
        f_lo = log_g(lo)
        if lo < 1e-300:
            break
    while log_g(hi * 2) < f_hi:
        hi *= 2
        f_hi = log_g(hi)
        if hi > 1e300:
            break
    s, log_val, iters, bracket = _golden_min(log_g, lo / 2, hi * 2, tol)
    if log_g(R) < log_val:
        s, log_val = R, log_g(R)
    return ExtremumResult(s, LogReal.from_log(log_val), bracket, iters)


# ---------------------------------------------------------------------------
# pair-level constants
# ---------------------------------------------------------------------------
def family_infimum(pair, tol: float = 1e-10) -> ExtremumResult:
    """inf over the pair's witness family of 1/delta^2 + pi n / epsilon^2."""
    n = pair.dimension
    lo, hi = pair.family_interval

    def q(t: float) -> float:
        delta, eps = pair.family(t)
        return 1.0 / delta**2 + math.pi * n / eps**2

    if lo == hi:
        return ExtremumResult(lo, LogReal.from_float(q(lo)), (lo, hi), 0)
    ts = np.linspace(lo, hi, 200)
    t, val, iters, bracket = _scan_then_golden_min(q, ts, tol)
    return ExtremumResult(t, LogReal.from_float(val), bracket, iters)


def tau_pair(pair) -> LogReal:
    """Variance budget 2 * rho_R * ||P||^2 * inf(1/delta^2 + pi n / eps^2)."""
    from .polycore import fock_norm_sq

    rho = rho_R(pair.R, pair.dimension).value
    norm_sq = LogReal.from_float(fock_norm_sq(pair.polynomial))
    inf_q = family_infimum(pair).value
    return LogReal.from_float(2.0) * rho * norm_sq * inf_q


def ball_volume(n: int, R: float) -> float:
    """Volume of the euclidean n-ball of radius R."""
    if n < 1 or R <= 0:
        raise ValueError("need n >= 1 and R > 0")
    return math.exp(0.5 * n * math.log(math.pi) + n * math.log(R) - math.lgamma(0.5 * n + 1))


def ball_volume_factorial_bound(n: int, R: float) -> float:
    """The factorial-form comparison value (2 pi^{floor(n/2)} / floor(n/2)!) R^n.

    This expression bounds the ball volume from ABOVE (equality at n = 1);
    the chain producing c_sigma_lower divides by the volume, so the usable
    direction is volume <= bound.  (The unit disk already shows the other
    direction fails: pi < 2 pi.)
    """
    k = n // 2
    bound = 2.0 * math.pi**k / math.factorial(k) * R**n
    assert ball_volume(n, R) <= bound * (1 + 1e-12)
    return bound


def c_sigma_lower(pair) -> LogReal:
    """Lower-bound constant m_tau / (2^n Vol B(R)) for the pair's topology."""
    n = pair.dimension
    tau = tau_pair(pair)
    if tau.ln() > 700.0:
        raise OverflowError(
            "tau exceeds double range; c_sigma_lower handles ln(tau) <= 700"
        )
    m = m_tau(tau.to_float())
    denom = LogReal.from_float(2.0) ** n * LogReal.from_float(ball_volume(n, pair.R))
    return m.value / denom


# ---------------------------------------------------------------------------
# signed-determinant integral over symmetric matrices
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    samples: int
    note: str = ""


def _symmetric_batch(gen: np.random.Generator, count: int, m: int) -> np.ndarray:
    # Density proportional to exp(-tr A^2): diagonal variance 1/2,
    # off-diagonal variance 1/4 (declared Gaussian convention).
    diag = streams.normals(gen, (count, m)) / math.sqrt(2.0)
    a = np.zeros((count, m, m))
    idx = np.arange(m)
    a[:, idx, idx] = diag
    if m > 1:
        iu, ju = np.triu_indices(m, k=1)
        off = streams.normals(gen, (count, iu.size)) * 0.5
        a[:, iu, ju] = off
        a[:, ju, iu] = off
    return a


def _batch_eigvals(a: np.ndarray) -> np.ndarray:
    m = a.shape[-1]
    if m == 1:
        return a[:, 0, :1]
    if m == 2:
        half_tr = 0.5 * (a[:, 0, 0] + a[:, 1, 1])
        disc = np.sqrt(0.25 * (a[:, 0, 0] - a[:, 1, 1]) ** 2 + a[:, 0, 1] ** 2)
        return np.stack([half_tr - disc, half_tr + disc], axis=1)
    return np.linalg.eigvalsh(a)


def e_R_constant(
    i: int,
    j: int,
    samples: int = 100_000,
    seed: int = 0,
    threads: int = 1,
) -> MonteCarloEstimate:
    """Monte Carlo for E(|det A| ; A symmetric of size i+j with signature (i, j)).

    A is drawn from the Gaussian measure with density proportional to
    exp(-tr A^2).  Size 0 returns 1 by convention.  The measure is invariant
    under A -> -A, which swaps the signature; the mirrored case is folded
    onto its canonical partner so the two return identical estimates, not
    merely equal expectations.
    """
    if i < 0 or j < 0:
        raise ValueError("signature entries must be nonnegative")
    if samples < 1:
        raise ValueError("samples must be positive")
    if i < j:
        i, j = j, i
    m = i + j
    if m == 0:
        return MonteCarloEstimate(1.0, 0.0, samples, note="size-0 convention")

    tag = streams.stream_tag("e_R_constant")

    def block(start: int, count: int):
        gen = streams.generator(seed, tag, m, start)
        a = _symmetric_batch(gen, count, m)
        lam = _batch_eigvals(a)
        det = np.prod(lam, axis=1)
        pos = (lam > 0).sum(axis=1)
        neg = (lam < 0).sum(axis=1)
        sel = (pos == i) & (neg == j)
        vals = np.where(sel, np.abs(det), 0.0)
        return float(vals.sum()), float((vals * vals).sum())

    parts = streams.run_blocks(samples, block, threads=threads)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    stderr = math.sqrt(var / samples)
    return MonteCarloEstimate(mean, stderr, samples)
