import json
import math

import numpy as np
import pytest

from bettilab.lab import (
    EXCLUSION_LIMIT,
    audit,
    betti_lower_bound_report,
    curve_resolution,
    packing_count,
    product_betti,
    recompute,
    run_kostlan_curves,
    run_kostlan_roots,
    run_local_presence,
    run_sup_norm,
    sphere_betti,
    wilson_lower,
)


# ---------------------------------------------------------------------------
# small pieces
# ---------------------------------------------------------------------------
def test_wilson_lower_known_value():
    # closed form for successes=25, total=100, z=1.96
    z = 1.96
    ph, n = 0.25, 100
    denom = 1 + z * z / n
    center = ph + z * z / (2 * n)
    rad = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n))
    assert wilson_lower(25, 100) == pytest.approx((center - rad) / denom, rel=1e-12)
    assert wilson_lower(0, 50) == 0.0
    assert 0.9 < wilson_lower(1000, 1000) < 1.0


def test_wilson_lower_is_conservative():
    # lower limit always sits below the point estimate
    for s, t in ((1, 10), (5, 10), (9, 10), (500, 1000)):
        assert wilson_lower(s, t) < s / t


def test_packing_count_reference_values():
    # n=1: the 1-ball of radius r has volume 2r, so cells have length
    # 2 * 2 R/sqrt(d) = 0.4 and a segment of volume 10 packs 25 of them
    assert packing_count(1, 1.0, 100, 10.0) == 25
    # n=2 with the round cell 4 pi R^2/d
    R = math.sqrt(math.sqrt(2.0) + 2.0)
    vol = 2.0 * math.pi**2
    want = math.ceil(vol / (4.0 * math.pi * R * R / 64.0))
    assert packing_count(2, R, 64, vol) == want
    with pytest.raises(ValueError):
        packing_count(1, 1.0, 4, 0.0)


def test_packing_count_exact_integer_guard():
    # volume exactly k cells: float dust must not push the ceiling to k+1
    n, R, d = 1, 1.0, 4
    cell = 2.0 * (2.0 * R / math.sqrt(d))
    assert packing_count(n, R, d, 7 * cell) == 7


def test_sphere_betti():
    assert sphere_betti(0) == [2]
    assert sphere_betti(1) == [1, 1]
    assert sphere_betti(3) == [1, 0, 0, 1]
    with pytest.raises(ValueError):
        sphere_betti(-1)


def test_product_betti_kunneth():
    assert product_betti(1, 1) == [1, 2, 1]          # torus
    assert product_betti(0, 1) == [2, 2]             # two circles
    assert product_betti(1, 2) == [1, 1, 1, 1]       # S^1 x S^2
    assert product_betti(0, 0) == [4]


def test_curve_resolution_grows():
    assert curve_resolution(8) <= curve_resolution(16) <= curve_resolution(32)


# ---------------------------------------------------------------------------
# experiments: reproducibility and audit
# ---------------------------------------------------------------------------
def test_roots_experiment_summary_and_audit():
    rep = run_kostlan_roots(4, samples=800, seed=5)
    s = rep.summary
    assert abs(s["mean"] - 2.0) <= 3.0 * s["stderr"]
    assert s["target"] == pytest.approx(2.0)
    assert s["sturm_disagreements"] == 0
    assert rep.all_bounds_satisfied()
    assert audit(rep.to_json_dict())


def test_roots_thread_identity():
    a = run_kostlan_roots(6, samples=600, seed=9, threads=1)
    b = run_kostlan_roots(6, samples=600, seed=9, threads=4)
    assert a.identity_json() == b.identity_json()


def test_roots_audit_detects_tampering():
    rep = run_kostlan_roots(4, samples=300, seed=1).to_json_dict()
    assert audit(rep)
    rep["summary"]["mean"] += 1e-9
    assert not audit(rep)


def test_roots_per_sample_records():
    rep = run_kostlan_roots(4, samples=64, seed=2)
    rows = rep.per_sample
    assert len(rows) == 64
    assert [r["index"] for r in rows] == list(range(64))
    checked = [r for r in rows if r["crosschecked"]]
    assert len(checked) == rep.summary["crosschecked"] > 0
    assert all(r["count"] % 2 == 0 for r in rows)  # even degree parity


def test_sup_norm_experiment():
    rep = run_sup_norm(R=1.0, samples=200, seed=3)
    assert rep.all_bounds_satisfied()
    assert not rep.excessive_exclusions()
    assert audit(rep.to_json_dict())


def test_presence_experiment_and_wilson():
    rep = run_local_presence(samples=150, seed=4)
    s = rep.summary
    assert s["used"] + rep.excluded == 150
    assert s["hits"] <= s["used"]
    assert s["wilson_lower"] <= s["estimate"] + 1e-12
    assert audit(rep.to_json_dict())


def test_curves_experiment_smoke():
    rep = run_kostlan_curves(d_list=(8,), samples=40, seed=6)
    assert rep.all_bounds_satisfied()
    assert audit(rep.to_json_dict())
    per_d = rep.summary["per_degree"]
    assert list(per_d) == ["8"] or list(per_d) == [8]


def test_recompute_rejects_unknown_experiment():
    rep = run_kostlan_roots(4, samples=50, seed=0).to_json_dict()
    rep["config"]["experiment"] = "mystery"
    with pytest.raises(ValueError):
        recompute(rep)


def test_report_files(tmp_path):
    rep = run_kostlan_roots(4, samples=50, seed=0)
    jpath = tmp_path / "report.json"
    cpath = tmp_path / "report.csv"
    rep.write_json(str(jpath))
    rep.write_csv(str(cpath))
    loaded = json.loads(jpath.read_text())
    assert audit(loaded)
    header = cpath.read_text().splitlines()[0].split(",")
    assert "index" in header and "count" in header
    assert len(cpath.read_text().splitlines()) == 51


def test_exclusion_limit_constant():
    assert EXCLUSION_LIMIT == 0.01


# ---------------------------------------------------------------------------
# aggregate Betti lower bounds
# ---------------------------------------------------------------------------
def test_betti_bound_n1():
    rep = betti_lower_bound_report(1, 0)
    assert rep.all_bounds_satisfied()
    assert rep.summary["classes"] == 1
    agg = rep.summary["aggregate"]
    # the single class is S^0 with b_0 = 2: aggregate = 2 c_sphere
    row = rep.per_sample[0]
    assert row["b_i"] == 2
    assert agg["log"] == pytest.approx(row["c_lower"]["log"] + math.log(2.0))


def test_betti_bound_n2_classes():
    rep = betti_lower_bound_report(2, 1)
    assert rep.all_bounds_satisfied()
    labels = [r["class"] for r in rep.per_sample]
    assert labels == ["S^1", "S^0 x S^1"]
    b1 = {r["class"]: r["b_i"] for r in rep.per_sample}
    assert b1["S^1"] == 1       # circle
    assert b1["S^0 x S^1"] == 2  # two circles
    assert rep.summary["loglog_neg_aggregate"] is not None


def test_betti_bound_aggregate_dominates_each_class():
    from bettilab.constants import LogReal

    rep = betti_lower_bound_report(3, 1)
    agg = LogReal.from_log(
        rep.summary["aggregate"]["log"], rep.summary["aggregate"]["sign"]
    )
    for row in rep.per_sample:
        c = LogReal.from_log(row["contribution"]["log"], row["contribution"]["sign"])
        assert agg >= c


def test_betti_bound_input_guards():
    with pytest.raises(ValueError):
        betti_lower_bound_report(0, 0)
    with pytest.raises(ValueError):
        betti_lower_bound_report(2, 2)
