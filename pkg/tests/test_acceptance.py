"""Acceptance sweep: one test (and one printed PASS/FAIL line) per criterion.

Run with `pytest -v -s tests/test_acceptance.py` to see the per-criterion
lines; each test also asserts its stated runtime budget, measured on a single
worker unless the criterion is about worker counts.
"""

import math
import time

import numpy as np

from bettilab.constants import (
    LogReal,
    c_sigma_lower,
    e_R_constant,
    f_tau_log,
    m_tau,
    rho_R,
    tau_pair,
)
from bettilab.lab import (
    run_kostlan_curves,
    run_kostlan_roots,
    run_local_presence,
    run_sup_norm,
)
from bettilab.pairs import (
    TransversalityGrid,
    barrier_rescale_check,
    perturbation_budget,
    product_pair,
    sphere_pair,
    stability_check,
    verify_transversality,
)
from bettilab.polycore import MultiPoly, fock_norm_sq


def _line(num, ok, budget, elapsed, detail):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(
        "criterion %s %s (%.1fs of %.0fs) — %s" % (num, status, elapsed, budget, detail)
    )
    assert ok, detail
    assert elapsed < budget, "budget exceeded: %.1fs >= %.0fs" % (elapsed, budget)


def test_criterion_01_norm_closed_forms():
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(1, 11):
        want = (math.sqrt(n) + 1.0) ** 2 + 2.0 * n / math.pi**2
        got = fock_norm_sq(sphere_pair(n).polynomial)
        worst = max(worst, abs(got - want) / want)
        for i in range(n):
            k = i + 1
            want = (
                9.0
                + (2.0 / math.pi**2) * (n - k)
                + (32.0 / math.pi**2) * k
                + (24.0 / math.pi**4) * k
                + (16.0 / math.pi**4) * (k * (k - 1) // 2)
            )
            got = fock_norm_sq(product_pair(n, i).polynomial)
            worst = max(worst, abs(got - want) / want)
    _line("1", worst <= 1e-12, 1.0, time.perf_counter() - t0,
          "norm closed forms, worst rel err %.2e over n<=10, all i" % worst)


def test_criterion_02_constant_chains():
    t0 = time.perf_counter()
    ok = True
    worst = ""
    for n in range(1, 7):
        lt = tau_pair(sphere_pair(n)).ln()
        c = c_sigma_lower(sphere_pair(n))
        if not (lt <= 43.0 * n and c >= LogReal.from_log(-2.0 * math.exp(43.0 * n))):
            ok, worst = False, "sphere n=%d" % n
        for i in range(n):
            lt = tau_pair(product_pair(n, i)).ln()
            c = c_sigma_lower(product_pair(n, i))
            if not (
                lt <= 70.0 * n and c >= LogReal.from_log(-2.0 * math.exp(70.0 * n))
            ):
                ok, worst = False, "product n=%d i=%d" % (n, i)
    _line("2", ok, 1.0, time.perf_counter() - t0,
          worst or "ln tau <= 43n/70n and c above the double-exponential floor, n<=6")


def test_criterion_03_m_tau_chain():
    t0 = time.perf_counter()
    ok = True
    for tau in np.logspace(-3, 6, 60):
        tau = float(tau)
        r = m_tau(tau)
        if not (math.sqrt(tau) <= r.argument <= math.sqrt(tau + 1.0) + 1e-12):
            ok = False
        upper_a = math.sqrt(tau + 1.0)
        mid = f_tau_log(tau, upper_a)
        low_log = (
            -((upper_a + 1.0) ** 2)
            - 0.5 * math.log(math.pi)
            - math.log(tau + 1.0)
        )
        if not (r.value >= mid and mid >= LogReal.from_log(low_log)):
            ok = False
    _line("3", ok, 1.0, time.perf_counter() - t0,
          "maximizer bracket and lower chain on 60-point log grid")


def test_criterion_04_rho_cap():
    t0 = time.perf_counter()
    ok = True
    for R in (0.5, 1.0, 2.0, math.sqrt(5.0)):
        for n in (1, 2, 3):
            cap = n * math.log(4.0) + 4.0 * math.pi * R * R
            if rho_R(R, n).value.ln() > cap + 1e-12:
                ok = False
    _line("4", ok, 1.0, time.perf_counter() - t0,
          "rho below 4^n e^{4 pi R^2} on the R x n grid")


def test_criterion_05_sqrt_d_law():
    t0 = time.perf_counter()
    details = []
    ok = True
    for d in (4, 10, 100):
        rep = run_kostlan_roots(d, samples=10_000, seed=0)
        s = rep.summary
        ok = ok and rep.all_bounds_satisfied() and s["sturm_disagreements"] == 0
        details.append("d=%d mean %.4f (se %.4f)" % (d, s["mean"], s["stderr"]))
    _line("5", ok, 30.0, time.perf_counter() - t0, "; ".join(details))


def test_criterion_06_perturbation_stability():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    flips = 0
    for pair, tpar in ((sphere_pair(2), 0.5), (product_pair(2, 0), 0.0)):
        d, e = pair.witness_at(tpar)
        for _ in range(200):
            raw = MultiPoly(2, {
                (a, b): float(rng.normal())
                for a in range(3) for b in range(3) if a + b <= 2
            })
            sup_g, sup_dg = perturbation_budget(raw, pair.domain.radius)
            g = raw.scale(0.45 * min(d / sup_g, e / sup_dg))
            if not stability_check(pair, d, e, g).unchanged:
                flips += 1
    _line("6", flips == 0, 60.0, time.perf_counter() - t0,
          "%d component-count changes over 2 x 200 admissible perturbations" % flips)


def test_criterion_07_certifications_at_512():
    t0 = time.perf_counter()
    margin = 1.0 - 1e-3
    ok = True
    for n in (1, 2, 3):
        pair = sphere_pair(n)
        grid = TransversalityGrid(pair, 512)
        des = [
            (d, e * margin)
            for d, e in (pair.witness_at(t) for t in np.linspace(0.02, 0.9, 50))
        ]
        if not all(w.verified for w in grid.family_witnesses(des)):
            ok = False
        for i in range(n):
            pr = product_pair(n, i)
            d, e = pr.witness_at(0.0)
            if not verify_transversality(pr, d, e * margin, 512).verified:
                ok = False
    _line("7", ok, 60.0, time.perf_counter() - t0,
          "50-point family (delta in [0.02, 0.9]) and product points, n<=3, res 512")


def test_criterion_08_rescale_ladder():
    t0 = time.perf_counter()
    ok = True
    for pair, tpar in ((sphere_pair(2), 0.5), (product_pair(2, 0), 0.0)):
        d_, e_ = pair.witness_at(tpar)
        for d in (1, 4, 16, 64, 256):
            if not barrier_rescale_check(pair, d, d_, e_):
                ok = False
    _line("8", ok, 30.0, time.perf_counter() - t0,
          "rescaled regularity at d in {1,4,16,64,256}, both pairs")


def test_criterion_09_sup_norm_bounds():
    t0 = time.perf_counter()
    rep = run_sup_norm(R=1.0, n=1, samples=1000, seed=0)
    s = rep.summary
    _line("9", rep.all_bounds_satisfied(), 120.0, time.perf_counter() - t0,
          "E sup|f|^2 = %.3f, E sup||df||^2 = %.3f below their growth limits"
          % (s["mean_sup_f2"], s["mean_sup_df2"]))


def test_criterion_10_presence_positive():
    t0 = time.perf_counter()
    rep = run_local_presence(samples=10_000, seed=0)
    s = rep.summary
    ok = (
        rep.all_bounds_satisfied()
        and not rep.excessive_exclusions()
        and s["hits"] > 0
    )
    _line("10", ok, 600.0, time.perf_counter() - t0,
          "hits %d/%d, wilson lower %.4f, above m_tau" % (s["hits"], s["used"], s["wilson_lower"]))


def test_criterion_11_signed_determinant_constants():
    t0 = time.perf_counter()
    checks = []
    est = e_R_constant(1, 0, samples=1_000_000, seed=0)
    checks.append(abs(est.value - 1.0 / (2.0 * math.sqrt(math.pi))) <= 3.0 * est.stderr)
    est01 = e_R_constant(0, 1, samples=1_000_000, seed=0)
    checks.append(est01.value == est.value)  # same stream, mirrored signature
    targets = {(1, 1): math.sqrt(2.0) / 4.0, (2, 0): (math.sqrt(2.0) - 1.0) / 8.0,
               (0, 2): (math.sqrt(2.0) - 1.0) / 8.0}
    worst = 0.0
    for (i, j), want in targets.items():
        est = e_R_constant(i, j, samples=1_000_000, seed=0)
        checks.append(abs(est.value - want) <= 3.0 * est.stderr)
        worst = max(worst, abs(est.value - want) / est.stderr)
    _line("11", all(checks), 60.0, time.perf_counter() - t0,
          "size-1 and size-2 constants at 1e6 samples, worst z = %.2f" % worst)


def test_criterion_12_worker_reproducibility():
    t0 = time.perf_counter()
    runs = {
        "roots": lambda th: run_kostlan_roots(6, samples=400, seed=3, threads=th),
        "curves": lambda th: run_kostlan_curves((8,), samples=16, seed=3, threads=th),
        "sup": lambda th: run_sup_norm(samples=200, seed=3, threads=th),
        "presence": lambda th: run_local_presence(samples=120, seed=3, threads=th),
    }
    ok = True
    for name, make in runs.items():
        base = make(1).identity_json()
        for th in (4, 8):
            if make(th).identity_json() != base:
                ok = False
    _line("12", ok, 300.0, time.perf_counter() - t0,
          "identity JSON equal at 1, 4, 8 workers for all four experiments")


def test_trend_component_growth():
    t0 = time.perf_counter()
    rep = run_kostlan_curves((8, 12, 16), samples=500, seed=0)
    spread = rep.summary["trend"]["relative_spread"]
    ok = rep.all_bounds_satisfied() and spread < 0.25
    _line("trend", ok, 1800.0, time.perf_counter() - t0,
          "components/d spread %.3f over d in {8,12,16} at 500 samples" % spread)
