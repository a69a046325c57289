"""Experiment harness: seeded Monte Carlo runs with self-auditing reports.

Each experiment produces an ExperimentReport holding the full config echo,
one record per sample, summary statistics, and a list of bound comparisons
(each with the bound in plain or log form and a `satisfied` flag).  Reports
are deterministic functions of their config — identical config gives an
identical report at any worker count, except for the wall-clock field — and
they re-audit: `recompute` rebuilds summary/bounds/excluded from the stored
per-sample records alone.

Ambiguous component counts (confident = false) are excluded from statistics
and counted; a run whose exclusions exceed `EXCLUSION_LIMIT` of the samples
is marked, and the CLI turns that mark into exit code 3.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import streams
from .constants import (
    LogReal,
    ball_volume,
    c_sigma_lower,
    m_tau,
    rho_R,
    tau_pair,
)
from .domains import Ball
from .ensembles import (
    fock_truncation_degree,
    kostlan_binary_diagonals,
    sample_fock,
    sample_kostlan,
)
from .pairs import product_pair, sphere_pair
from .zeroset import (
    compact_component_in_ball,
    projective_root_counts,
    real_root_count,
    sphere_components,
)

EXCLUSION_LIMIT = 0.01

# Conventions are config inputs echoed into every report, not silent
# constants.  The projective volumes normalize the curve statistics.
DEFAULT_CONVENTIONS = {
    "projective_line_volume": math.pi,
    "projective_plane_volume": 2.0 * math.pi**2,
    "symmetric_matrix_measure": "density ~ exp(-tr A^2): diag var 1/2, off-diag var 1/4",
    "sign_at_zero": "grid corner with f = 0 counts as positive",
}


# ---------------------------------------------------------------------------
# config / report plumbing
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    samples: int
    seed: int
    threads: int
    resolution: int = 0
    params: dict = field(default_factory=dict)
    conventions: dict = field(default_factory=lambda: dict(DEFAULT_CONVENTIONS))

    def to_json_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "samples": self.samples,
            "seed": self.seed,
            "threads": self.threads,
            "resolution": self.resolution,
            "params": dict(self.params),
            "conventions": dict(self.conventions),
        }


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    per_sample: list
    summary: dict
    bounds: list
    excluded: int
    elapsed_seconds: float

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "per_sample": self.per_sample,
            "summary": self.summary,
            "bounds": self.bounds,
            "excluded": self.excluded,
            "elapsed_seconds": self.elapsed_seconds,
        }

    def identity_json(self) -> str:
        """Canonical JSON with execution detail (wall clock, worker count)
        stripped; runs that differ only in scheduling must agree byte for
        byte."""
        d = self.to_json_dict()
        d.pop("elapsed_seconds")
        d["config"] = {k: v for k, v in d["config"].items() if k != "threads"}
        return json.dumps(d, sort_keys=True)

    def all_bounds_satisfied(self) -> bool:
        return all(b.get("satisfied", False) for b in self.bounds)

    def excessive_exclusions(self) -> bool:
        total = len(self.per_sample)
        return total > 0 and self.excluded > EXCLUSION_LIMIT * total

    def write_json(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    def write_csv(self, path: str):
        cols = sorted({k for row in self.per_sample for k in row})
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            for row in self.per_sample:
                w.writerow(row)


def _bound(name: str, satisfied: bool, **detail) -> dict:
    out = {"name": name, "satisfied": bool(satisfied)}
    out.update(detail)
    return out


def _mean_stderr(values) -> tuple:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return float("nan"), float("nan")
    mean = float(v.mean())
    if v.size == 1:
        return mean, 0.0
    return mean, float(v.std(ddof=1) / math.sqrt(v.size))


def wilson_lower(successes: int, total: int, z: float = 1.96) -> float:
    """Lower end of the Wilson score interval for a binomial proportion."""
    if total == 0:
        return 0.0
    p = successes / total
    z2 = z * z
    centre = p + z2 / (2 * total)
    spread = z * math.sqrt(p * (1 - p) / total + z2 / (4 * total * total))
    return max(0.0, (centre - spread) / (1 + z2 / total))


# ---------------------------------------------------------------------------
# experiment: real roots of univariate samples
# ---------------------------------------------------------------------------
def _roots_finalize(rows: list, params: dict) -> tuple:
    d = params["d"]
    mean, se = _mean_stderr([r["count"] for r in rows])
    target = math.sqrt(d)
    disagreements = sum(1 for r in rows if r["disagreement"])
    checked = sum(1 for r in rows if r["crosschecked"])
    summary = {
        "mean": mean,
        "stderr": se,
        "target": target,
        "abs_error": abs(mean - target),
        "crosschecked": checked,
        "sturm_disagreements": disagreements,
    }
    ok = abs(mean - target) <= 3.0 * se if se > 0 else mean == target
    bounds = [
        _bound(
            "mean_root_count_within_3_stderr_of_sqrt_d",
            ok,
            target=target,
            estimate=mean,
            stderr=se,
        )
    ]
    return summary, bounds, 0


def run_kostlan_roots(
    d: int,
    samples: int = 10_000,
    seed: int = 0,
    threads: int = 1,
    crosscheck=None,
    crosscheck_stride: int = 4,
) -> ExperimentReport:
    """Real projective roots of random degree-d binary forms vs sqrt(d).

    The primary count evaluates each form at unit directions (see
    projective_root_counts); with `crosscheck` on, every stride-th sample is
    recounted on the dehomogenised chart through the companion matrix (plus
    the point at infinity when the leading coefficient vanishes) and any
    mismatch sets the row's disagreement flag.  Default: crosscheck up to
    degree 32 — beyond that the monomial-basis chart methods are themselves
    unreliable.  A floating Sturm chain joins the vote only up to degree 10;
    higher-degree chains misplace sign variations every few thousand draws.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if crosscheck is None:
        crosscheck = d <= 32
    stride = max(1, int(crosscheck_stride))
    t0 = time.perf_counter()

    def block(start: int, count: int) -> list:
        diags = kostlan_binary_diagonals(d, seed, start, count)
        counts = projective_root_counts(diags)
        out = []
        for j in range(count):
            k = start + j
            checked = crosscheck and k % stride == 0
            disagree = False
            if checked:
                rc = real_root_count(diags[j], crosscheck=d <= 10)
                affine = rc.count
                if len(np.trim_zeros(diags[j], "b")) - 1 < d:
                    affine += 1  # zero of the form at the chart boundary
                disagree = rc.disagreement or affine != counts[j]
            out.append(
                {
                    "index": k,
                    "count": int(counts[j]),
                    "crosschecked": bool(checked),
                    "disagreement": bool(disagree),
                }
            )
        return out

    rows = []
    for part in streams.run_blocks(samples, block, threads=threads, block=512):
        rows.extend(part)
    params = {
        "d": d,
        "crosscheck": bool(crosscheck),
        "crosscheck_stride": stride,
    }
    summary, bounds, excluded = _roots_finalize(rows, params)
    config = ExperimentConfig(
        "kostlan-roots", samples, seed, threads, 0, params
    )
    return ExperimentReport(
        config, rows, summary, bounds, excluded, time.perf_counter() - t0
    )


# ---------------------------------------------------------------------------
# experiment: projective curve components
# ---------------------------------------------------------------------------
def curve_resolution(d: int) -> int:
    """Cells per cube-face edge: at least 8 sqrt(d), rounded up to even."""
    r = int(math.ceil(8.0 * math.sqrt(d)))
    return r + (r % 2)


def _curves_finalize(rows: list, params: dict) -> tuple:
    d_list = params["d_list"]
    vol = params["projective_plane_volume"]
    log_c = params["log_c_lower"]  # ln of the assembled constant, float
    per_d = {}
    excluded = 0
    for d in d_list:
        sub = [r for r in rows if r["d"] == d]
        good = [r["count"] for r in sub if r["confident"]]
        excluded += len(sub) - len(good)
        mean, se = _mean_stderr(good)
        per_d[str(d)] = {
            "used": len(good),
            "excluded": len(sub) - len(good),
            "mean": mean,
            "stderr": se,
            "ratio": mean / d,
        }
    ratios = [per_d[str(d)]["ratio"] for d in d_list]
    spread = float("nan")
    if ratios and min(ratios) > 0:
        spread = (max(ratios) - min(ratios)) / (sum(ratios) / len(ratios))
    summary = {
        "per_degree": per_d,
        "trend": {
            "ratios": ratios,
            "relative_spread": spread,
            "exploratory": True,
        },
    }
    bounds = []
    bound_value = LogReal.from_log(log_c) * LogReal.from_float(vol)
    for d in d_list:
        ratio = per_d[str(d)]["ratio"]
        ok = ratio > 0 and LogReal.from_float(ratio) >= bound_value
        bounds.append(
            _bound(
                "mean_components_per_d_exceeds_lower_constant",
                ok,
                d=d,
                estimate=ratio,
                bound=bound_value.to_json_dict(),
            )
        )
    bounds.append(
        _bound(
            "ratio_relative_spread_below_25_percent",
            bool(spread == spread and spread < 0.25),
            spread=spread,
            exploratory=True,
        )
    )
    return summary, bounds, excluded


def run_kostlan_curves(
    d_list=(8, 12, 16),
    samples: int = 500,
    seed: int = 0,
    threads: int = 1,
    resolution: int = 0,
    conventions: dict = None,
) -> ExperimentReport:
    """Components of random projective plane curves, scaled by degree.

    For each degree the sample polynomial is counted on the sphere with
    antipodal identification; the per-degree mean over confident samples is
    compared (in log arithmetic) against the assembled lower-bound constant
    times the recorded projective-plane volume.
    """
    d_list = [int(d) for d in d_list]
    conv = dict(DEFAULT_CONVENTIONS)
    if conventions:
        conv.update(conventions)
    t0 = time.perf_counter()
    log_c = c_sigma_lower(sphere_pair(2)).ln()

    rows = []
    for d in d_list:
        res = resolution or curve_resolution(d)

        def block(start: int, count: int, d=d, res=res) -> list:
            out = []
            for k in range(start, start + count):
                p = sample_kostlan(2, d, seed, index=k)
                rep = sphere_components(p, res, identify_antipodal=True)
                out.append(
                    {
                        "d": d,
                        "index": k,
                        "count": int(rep.count),
                        "confident": bool(rep.confident),
                        "refinement_depth": int(rep.refinement_depth),
                    }
                )
            return out

        for part in streams.run_blocks(samples, block, threads=threads, block=16):
            rows.extend(part)

    params = {
        "d_list": d_list,
        "projective_plane_volume": conv["projective_plane_volume"],
        "log_c_lower": log_c,
    }
    summary, bounds, excluded = _curves_finalize(rows, params)
    config = ExperimentConfig(
        "kostlan-curves", samples, seed, threads, resolution, params, conv
    )
    return ExperimentReport(
        config, rows, summary, bounds, excluded, time.perf_counter() - t0
    )


# ---------------------------------------------------------------------------
# experiment: sup norms of the analytic field on a ball
# ---------------------------------------------------------------------------
def _max_with_refinement(values_fn, lo: float, hi: float, resolution: int, rounds: int = 2):
    """Max of values_fn over [lo, hi] by grid plus windowed re-sampling."""
    xs = np.linspace(lo, hi, resolution + 1)
    vals = values_fn(xs)
    for _ in range(rounds):
        k = int(np.argmax(vals))
        a = xs[max(k - 1, 0)]
        b = xs[min(k + 1, xs.size - 1)]
        xs = np.linspace(a, b, 65)
        vals = values_fn(xs)
    return float(vals.max())


def _sup_finalize(rows: list, params: dict) -> tuple:
    log_rho = params["log_rho"]
    n = params["n"]
    mean_f2, se_f2 = _mean_stderr([r["sup_f2"] for r in rows])
    mean_df2, se_df2 = _mean_stderr([r["sup_df2"] for r in rows])
    summary = {
        "mean_sup_f2": mean_f2,
        "stderr_sup_f2": se_f2,
        "mean_sup_df2": mean_df2,
        "stderr_sup_df2": se_df2,
    }
    half_rho = LogReal.from_log(log_rho) * LogReal.from_float(0.5)
    grad_limit = half_rho * LogReal.from_float(math.pi * n)
    bounds = [
        _bound(
            "mean_sup_f2_below_half_rho",
            LogReal.from_float(mean_f2) <= half_rho,
            estimate=mean_f2,
            bound=half_rho.to_json_dict(),
        ),
        _bound(
            "mean_sup_df2_below_half_pi_n_rho",
            LogReal.from_float(mean_df2) <= grad_limit,
            estimate=mean_df2,
            bound=grad_limit.to_json_dict(),
        ),
    ]
    return summary, bounds, 0


def run_sup_norm(
    R: float = 1.0,
    n: int = 1,
    truncation: int = 0,
    samples: int = 1000,
    seed: int = 0,
    threads: int = 1,
    resolution: int = 512,
) -> ExperimentReport:
    """E(sup |f|^2) and E(sup ||df||^2) over the ball of radius R.

    The sup is taken on a fine grid with two rounds of windowed refinement
    around the running maximum.  Both means are compared against the growth
    factor: (1/2) rho_R and (1/2) pi n rho_R.
    """
    if n not in (1, 2):
        raise ValueError("sup-norm experiment supports n in {1, 2}")
    D = truncation or fock_truncation_degree(R)
    log_rho = rho_R(R, n).value.ln()
    t0 = time.perf_counter()

    def block(start: int, count: int) -> list:
        out = []
        for k in range(start, start + count):
            f = sample_fock(n, D, seed, index=k)
            if n == 1:
                sup_f2 = _max_with_refinement(
                    lambda xs: f.at_points(xs[:, None]) ** 2, -R, R, resolution
                )
                sup_df2 = _max_with_refinement(
                    lambda xs: f.gradient_at_points(xs[:, None])[:, 0] ** 2,
                    -R,
                    R,
                    resolution,
                )
            else:
                axis = np.linspace(-R, R, resolution + 1)
                X, Y = np.meshgrid(axis, axis, indexing="ij")
                inside = X * X + Y * Y <= R * R
                vals = f.on_grid(axis, axis) ** 2
                sup_f2 = float(vals[inside].max())
                g = f.grad_norm_on_grid(axis, axis) ** 2
                sup_df2 = float(g[inside].max())
            out.append(
                {"index": k, "sup_f2": float(sup_f2), "sup_df2": float(sup_df2)}
            )
        return out

    rows = []
    for part in streams.run_blocks(samples, block, threads=threads, block=64):
        rows.extend(part)
    params = {"R": R, "n": n, "truncation": D, "log_rho": log_rho}
    summary, bounds, excluded = _sup_finalize(rows, params)
    config = ExperimentConfig(
        "sup-norm", samples, seed, threads, resolution, params
    )
    return ExperimentReport(
        config, rows, summary, bounds, excluded, time.perf_counter() - t0
    )


# ---------------------------------------------------------------------------
# experiment: loop presence in a fixed ball
# ---------------------------------------------------------------------------
def _presence_finalize(rows: list, params: dict) -> tuple:
    log_m = params["log_m_tau"]
    used = [r for r in rows if r["confident"]]
    excluded = len(rows) - len(used)
    hits = sum(1 for r in used if r["present"])
    total = len(used)
    phat = hits / total if total else float("nan")
    lo = wilson_lower(hits, total)
    summary = {
        "used": total,
        "excluded": excluded,
        "hits": hits,
        "estimate": phat,
        "wilson_lower": lo,
    }
    bounds = [
        _bound("wilson_lower_strictly_positive", lo > 0.0, wilson_lower=lo),
        _bound(
            "wilson_lower_at_least_m_tau",
            lo > 0 and LogReal.from_float(lo) >= LogReal.from_log(log_m),
            wilson_lower=lo,
            m_tau={"sign": 1, "log": log_m},
        ),
    ]
    return summary, bounds, excluded


def run_local_presence(
    radius: float = 0.0,
    truncation: int = 0,
    samples: int = 10_000,
    seed: int = 0,
    threads: int = 1,
    resolution: int = 128,
    max_depth: int = 4,
) -> ExperimentReport:
    """Probability that the analytic field has a compact loop in a ball.

    The ball defaults to the planar sphere pair's working ball; the estimate
    carries a Wilson lower confidence bound, which must stay strictly
    positive and (trivially, but stated) above the theoretical constant
    m_tau of the pair.
    """
    pair = sphere_pair(2)
    R = radius or pair.R
    D = truncation or fock_truncation_degree(R)
    tau_log = tau_pair(pair).ln()
    log_m = m_tau(math.exp(tau_log)).value.ln()
    t0 = time.perf_counter()

    def block(start: int, count: int) -> list:
        out = []
        for k in range(start, start + count):
            f = sample_fock(2, D, seed, index=k)
            present, rep = compact_component_in_ball(
                f, (0.0, 0.0), R, resolution, max_depth
            )
            out.append(
                {
                    "index": k,
                    "present": bool(present),
                    "count": int(rep.count),
                    "touching": int(rep.touching_boundary),
                    "confident": bool(rep.confident),
                    "refinement_depth": int(rep.refinement_depth),
                }
            )
        return out

    rows = []
    for part in streams.run_blocks(samples, block, threads=threads, block=64):
        rows.extend(part)
    params = {
        "radius": R,
        "truncation": D,
        "log_tau": tau_log,
        "log_m_tau": log_m,
        "max_depth": max_depth,
    }
    summary, bounds, excluded = _presence_finalize(rows, params)
    config = ExperimentConfig(
        "local-presence", samples, seed, threads, resolution, params
    )
    return ExperimentReport(
        config, rows, summary, bounds, excluded, time.perf_counter() - t0
    )


# ---------------------------------------------------------------------------
# assembly helpers: packing bound and the topology-catalog aggregate
# ---------------------------------------------------------------------------
def packing_count(n: int, R: float, d: int, volume: float) -> int:
    """ceil(volume / (2^n vol B(R/sqrt(d)))): how many separated balls fit.

    The expected count of well-separated zero-set copies is at least this
    packing number times the per-ball probability.
    """
    if volume <= 0:
        raise ValueError("volume must be positive")
    cell = 2.0**n * ball_volume(n, R / math.sqrt(d))
    ratio = volume / cell
    # guard the exact-integer case against float dust before ceiling
    return int(math.ceil(ratio - 1e-9 * max(1.0, abs(ratio))))


def sphere_betti(m: int) -> list:
    """Betti numbers b_0..b_m of the m-sphere (m = 0 gives [2])."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return [2]
    return [1] + [0] * (m - 1) + [1]


def product_betti(a: int, b: int) -> list:
    """Betti numbers of S^a x S^b from the convolution rule."""
    ba, bb = sphere_betti(a), sphere_betti(b)
    out = [0] * (len(ba) + len(bb) - 1)
    for i, x in enumerate(ba):
        for j, y in enumerate(bb):
            out[i + j] += x * y
    return out


def betti_lower_bound_report(n: int, i: int) -> ExperimentReport:
    """Aggregate lower-bound constant for the i-th Betti number in dimension n.

    Sums c-lower times b_i over the catalog {S^{n-1}} + {S^j x S^{n-1-j}}
    (unordered factors, best constant per class; products enter for n >= 2).
    Verifies the aggregate dominates its own witness term and stays
    consistent with the double-exponential floor exp(-2 e^{70 n}).
    """
    if n < 1 or not 0 <= i <= n - 1:
        raise ValueError("need n >= 1 and 0 <= i <= n-1")
    t0 = time.perf_counter()
    rows = []

    def add_class(label: str, betti: list, c: LogReal, log_tau: float):
        b_i = betti[i] if i < len(betti) else 0
        contribution = c * LogReal.from_float(b_i)
        rows.append(
            {
                "class": label,
                "betti": betti,
                "b_i": b_i,
                "log_tau": log_tau,
                "c_lower": c.to_json_dict(),
                "contribution": contribution.to_json_dict(),
            }
        )
        return contribution

    sp = sphere_pair(n)
    c_sphere = c_sigma_lower(sp)
    total = add_class("S^%d" % (n - 1), sphere_betti(n - 1), c_sphere, tau_pair(sp).ln())

    witness = None
    if n >= 2:
        for a in range(0, (n - 1) // 2 + 1):
            b = n - 1 - a
            best = None
            best_tau = None
            for idx in {a, b}:
                pr = product_pair(n, idx)
                c = c_sigma_lower(pr)
                if best is None or c > best:
                    best, best_tau = c, tau_pair(pr).ln()
            contr = add_class(
                "S^%d x S^%d" % (a, b), product_betti(a, b), best, best_tau
            )
            total = total + contr
            if {a, b} == {min(i, n - 1 - i), max(i, n - 1 - i)}:
                witness = rows[-1]
    if witness is None:
        witness = rows[0]  # n = 1: the catalog is the single sphere class

    floor_log = -2.0 * math.exp(70.0 * n)
    wit_contr = LogReal.from_log(
        witness["contribution"]["log"], witness["contribution"]["sign"]
    )
    bounds = [
        _bound(
            "aggregate_at_least_witness_term",
            total >= wit_contr,
            witness_class=witness["class"],
        ),
        _bound(
            "aggregate_consistent_with_double_exponential_floor",
            total >= LogReal.from_log(floor_log),
            floor_log=floor_log,
        ),
    ]
    summary = {
        "aggregate": total.to_json_dict(),
        "loglog_neg_aggregate": (
            total.loglog_neg() if total.sign > 0 and total.log_magnitude < 0 else None
        ),
        "classes": len(rows),
    }
    config = ExperimentConfig(
        "betti-bound", 0, 0, 1, 0, {"n": n, "i": i}
    )
    return ExperimentReport(
        config, rows, summary, bounds, 0, time.perf_counter() - t0
    )


# ---------------------------------------------------------------------------
# re-audit
# ---------------------------------------------------------------------------
_FINALIZERS = {
    "kostlan-roots": _roots_finalize,
    "kostlan-curves": _curves_finalize,
    "sup-norm": _sup_finalize,
    "local-presence": _presence_finalize,
}


def recompute(report_dict: dict) -> tuple:
    """(summary, bounds, excluded) rebuilt from per-sample records alone."""
    name = report_dict["config"]["experiment"]
    fin = _FINALIZERS.get(name)
    if fin is None:
        raise ValueError("no recompute rule for experiment %r" % name)
    return fin(report_dict["per_sample"], report_dict["config"]["params"])


def audit(report_dict: dict) -> bool:
    """True when the stored summary/bounds match a recomputation exactly."""
    summary, bounds, excluded = recompute(report_dict)
    return (
        json.dumps(summary, sort_keys=True)
        == json.dumps(report_dict["summary"], sort_keys=True)
        and json.dumps(bounds, sort_keys=True)
        == json.dumps(report_dict["bounds"], sort_keys=True)
        and excluded == report_dict["excluded"]
    )
