import json
import os

import pytest

from bettilab.cli import _emit, main
from bettilab.lab import ExperimentConfig, ExperimentReport
from bettilab.pairs import sphere_pair
from bettilab.polycore import MultiPoly


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_constants_report_keys(capsys):
    code, out = run(capsys, ["constants-report", "--pair", "sphere", "--n", "2"])
    assert code == 0
    d = json.loads(out)
    for key in (
        "pair",
        "n",
        "R",
        "log_rho",
        "log_tau",
        "m_tau_arg",
        "log_m_tau",
        "loglog_neg_c",
        "paper_bound_ok",
    ):
        assert key in d, key
    assert d["paper_bound_ok"] is True
    assert d["log_tau"] == pytest.approx(25.597472664872164, rel=1e-6)


def test_constants_report_product(capsys):
    code, out = run(
        capsys, ["constants-report", "--pair", "product", "--n", "3", "--i", "1"]
    )
    assert code == 0
    d = json.loads(out)
    assert d["pair"] == "product" and d["i"] == 1
    assert d["log_tau"] <= 70.0 * 3


def test_verify_pair_pass_and_fail(capsys):
    pair = sphere_pair(2)
    d, e = pair.witness_at(0.5)
    code, out = run(capsys, [
        "verify-pair", "--pair", "sphere", "--n", "2",
        "--delta", str(d), "--epsilon", str(e * 0.99),
    ])
    assert code == 0
    assert json.loads(out)["verified"] is True

    code, out = run(capsys, [
        "verify-pair", "--pair", "sphere", "--n", "2",
        "--delta", "0.5", "--epsilon", "10.0",
    ])
    assert code == 2
    assert json.loads(out)["verified"] is False


def test_count_components_ball(tmp_path, capsys):
    p = MultiPoly(2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
    poly = tmp_path / "circle.json"
    poly.write_text(json.dumps(p.to_json_dict()))
    code, out = run(capsys, [
        "count-components", "--poly", str(poly), "--ball", "0", "0", "1.5",
    ])
    assert code == 0
    assert json.loads(out)["count"] == 1


def test_count_components_box_and_out(tmp_path, capsys):
    p = MultiPoly(2, {(2, 0): 1.0, (0, 2): 4.0, (0, 0): -1.0})  # ellipse
    poly = tmp_path / "ellipse.json"
    poly.write_text(json.dumps(p.to_json_dict()))
    dest = tmp_path / "rep.json"
    code, out = run(capsys, [
        "count-components", "--poly", str(poly),
        "--box", "-2", "2", "-2", "2", "--out", str(dest),
    ])
    assert code == 0
    assert json.loads(dest.read_text())["count"] == 1
    # a figure lands next to --out
    assert (tmp_path / "components_signs.png").exists()


def test_count_components_sphere(tmp_path, capsys):
    p = MultiPoly(3, {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): -1.0})
    poly = tmp_path / "cone.json"
    poly.write_text(json.dumps(p.to_json_dict()))
    code, out = run(capsys, [
        "count-components", "--poly", str(poly), "--sphere",
    ])
    assert code == 0
    assert json.loads(out)["count"] == 2
    code, out = run(capsys, [
        "count-components", "--poly", str(poly), "--sphere", "--antipodal",
    ])
    assert code == 0
    assert json.loads(out)["count"] == 1


def test_roots_command_with_files(tmp_path, capsys):
    dest = tmp_path / "roots.json"
    table = tmp_path / "roots.csv"
    code, out = run(capsys, [
        "kostlan-roots", "--d", "4", "--samples", "400",
        "--seed", "7", "--out", str(dest), "--csv", str(table),
    ])
    assert code == 0
    blob = json.loads(out)
    assert "per_sample_rows" in blob  # long tables are elided on stdout
    full = json.loads(dest.read_text())
    assert len(full["per_sample"]) == 400
    assert table.read_text().count("\n") == 401
    assert (tmp_path / "roots_d4.png").exists()


def test_roots_command_explicit_figure_dir(tmp_path, capsys):
    figs = tmp_path / "figs"
    figs.mkdir()
    code, _ = run(capsys, [
        "kostlan-roots", "--d", "4", "--samples", "200", "--figures", str(figs),
    ])
    assert code == 0
    assert (figs / "roots_d4.png").exists()


def test_sup_norm_command(capsys):
    code, out = run(capsys, ["sup-norm", "--samples", "150", "--seed", "2"])
    assert code == 0
    blob = json.loads(out)
    assert all(b["satisfied"] for b in blob["bounds"])


def test_local_presence_command(capsys):
    code, out = run(capsys, ["local-presence", "--samples", "80", "--seed", "3"])
    assert code == 0
    blob = json.loads(out)
    assert blob["summary"]["used"] <= 80


def test_betti_bound_command(tmp_path, capsys):
    dest = tmp_path / "betti.json"
    code, out = run(capsys, [
        "betti-bound", "--n", "2", "--i", "1", "--out", str(dest),
    ])
    assert code == 0
    blob = json.loads(dest.read_text())
    assert blob["summary"]["classes"] == 2
    assert (tmp_path / "betti_catalog_n2_i1.png").exists()


def test_curves_command_small(capsys):
    code, out = run(capsys, [
        "kostlan-curves", "--d-list", "8", "--samples", "25", "--seed", "1",
    ])
    assert code == 0
    blob = json.loads(out)
    assert all(b["satisfied"] for b in blob["bounds"])


def test_no_subcommand_prints_help(capsys):
    code, out = run(capsys, [])
    assert code == 0
    assert "constants-report" in out


def test_unknown_subcommand_exits_via_argparse():
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_emit_exit_codes(tmp_path, capsys):
    cfg = ExperimentConfig("kostlan-roots", 10, 0, 1, 0, {"d": 4})
    rows = [{"index": k, "count": 2} for k in range(10)]

    class Args:
        out = None
        csv = None
        figures = None

    ok = ExperimentReport(cfg, rows, {}, [{"name": "b", "satisfied": True}], 0, 0.0)
    assert _emit(ok, Args()) == 0
    capsys.readouterr()
    bad = ExperimentReport(cfg, rows, {}, [{"name": "b", "satisfied": False}], 0, 0.0)
    assert _emit(bad, Args()) == 2
    capsys.readouterr()
    fuzzy = ExperimentReport(cfg, rows, {}, [{"name": "b", "satisfied": True}], 5, 0.0)
    assert _emit(fuzzy, Args()) == 3
    capsys.readouterr()


def test_overflow_maps_to_exit_2(capsys):
    # dimension high enough that the tau chain leaves double range
    code = main(["constants-report", "--pair", "sphere", "--n", "500"])
    captured = capsys.readouterr()
    assert code == 2
    assert "error" in captured.err
