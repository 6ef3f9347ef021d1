import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from bosonic_eps.cli import main, render, to_json


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_two_mode_json(capsys):
    code, out, _ = run(capsys, "spectrum", "--topology", "two_mode", "--epsilon", "1", "--kappa", "0.3",
                       "--gammas", "0.4,-0.4", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["rows"]) == 4
    assert doc["meta"]["match_error"] < 1e-10
    assert [r["parity"] for r in doc["rows"]] == [1, 2, 1, 2]


def test_spectrum_constraint_violation(capsys):
    code, _, err = run(capsys, "spectrum", "--topology", "three_mode_linear", "--kappa", "0.3",
                       "--gammas", "1,1,2")
    assert code == 2
    assert "2*g2 = g1 + g3" in err


def test_spectrum_defective_xi_warns(capsys):
    code, out, err = run(capsys, "spectrum", "--topology", "two_mode", "--kappa", "1.0", "--gamma-minus", "0")
    assert code == 0
    assert "warning" in err
    doc = json.loads(out)
    assert doc["meta"]["defective_xi"] is True
    assert all(r["analytic_re"] is None for r in doc["rows"])


def test_classify_two_mode_hp(capsys):
    code, out, _ = run(capsys, "classify", "--topology", "two_mode", "--kappa-over-eps", "0.6",
                       "--gamma-minus-over-eps", "0.8")
    assert code == 0
    (c,) = json.loads(out)["clusters"]
    assert (c["alg"], c["geo"], c["blocks"], c["class"]) == (4, 2, [2, 2], "HP")


def test_scan_two_by_two_rows(capsys):
    code, out, _ = run(capsys, "scan", "--topology", "two_mode", "--kappa-range", "0,1,2",
                       "--gamma-minus-range", "0,1,2", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4
    assert list(rows[0]) == ["kappa_over_eps", "gamma_minus_over_eps", "re_lambda_1", "re_lambda_2",
                             "im_lambda_1", "im_lambda_2", "residual_beta", "degenerate_flag"]


def test_scan_two_mode_traces_unit_circle(capsys):
    code, out, _ = run(capsys, "scan", "--topology", "two_mode", "--kappa-range", "0,1.5,151",
                       "--gamma-minus-range=-1.5,1.5,151")
    assert code == 0
    rows = [r for r in json.loads(out)["rows"] if r["degenerate_flag"]]
    assert len(rows) > 100
    radius = np.hypot([r["kappa_over_eps"] for r in rows], [r["gamma_minus_over_eps"] for r in rows])
    assert np.all(np.abs(radius - 1) < 0.03)


def test_scan_l2_two_bands(capsys):
    code, out, _ = run(capsys, "scan", "--topology", "four_mode_linear_l2", "--kappa-range", "0,1.5,151",
                       "--gamma-minus-range=-1.5,1.5,151")
    rows = [r for r in json.loads(out)["rows"] if r["degenerate_flag"]]
    k = np.array([r["kappa_over_eps"] for r in rows])
    g = np.array([r["gamma_minus_over_eps"] for r in rows])
    cs = [(3 + 5 ** 0.5) / 2, (3 - 5 ** 0.5) / 2]
    near = [np.abs(np.hypot(k, g / np.sqrt(c)) - 1) < 0.05 for c in cs]
    assert near[0].sum() > 20 and near[1].sum() > 20
    assert np.all(near[0] | near[1])


def test_scan_worker_count_does_not_change_output(capsys):
    base = ["scan", "--topology", "five_mode_pyramid", "--kappa-range", "0,1.5,31",
            "--gamma-minus-range=-1.5,1.5,17"]
    _, one, _ = run(capsys, *base, "--workers", "1")
    _, four, _ = run(capsys, *base, "--workers", "4")
    assert one == four


def test_csv_and_json_carry_identical_values(capsys):
    base = ["scan", "--topology", "three_mode_linear", "--kappa-range", "0.1,1.2,5",
            "--gamma-minus-range=-1,1,4"]
    _, js, _ = run(capsys, *base, "--format", "json")
    _, cs, _ = run(capsys, *base, "--format", "csv")
    jrows = json.loads(js)["rows"]
    crows = list(csv.DictReader(io.StringIO(cs)))
    for j, c in zip(jrows, crows):
        for key, value in j.items():
            if isinstance(value, bool):
                assert c[key] == str(value).lower()
            else:
                assert float(c[key]) == value


def test_output_is_byte_identical(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        assert main(["fom", "--topology", "two_mode", "--kappa-over-eps", "0.6", "--gamma-minus-over-eps", "0.8",
                     "--output", str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_floats_have_17_significant_digits():
    assert to_json({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}'
    assert to_json([float("nan"), None, True, 3]) == "[null, null, true, 3]"
    csv_text = render({"rows": [{"a": 1 / 3, "b": [2, 1], "c": [[2, 1], [1]]}]}, "csv")
    assert csv_text.splitlines()[1] == "0.33333333333333331,2 1,2+1;1"


def test_locus_command(capsys):
    code, out, _ = run(capsys, "locus", "--topology", "five_mode_linear", "--kappa-over-eps", "0.6",
                       "--gamma-minus-over-eps", "0.4")
    assert code == 0
    (row,) = json.loads(out)["rows"]
    assert row["branch"] == "beta" and row["c"] == 0.25 and row["on_locus"] is True
    code, out, _ = run(capsys, "locus", "--topology", "five_mode_pyramid")
    rows = json.loads(out)["rows"]
    assert [r["listed"] for r in rows] == [True, True, False]


def test_fom_genuine_clusters(capsys):
    code, out, _ = run(capsys, "fom", "--topology", "two_mode", "--kappa-over-eps", "0.6",
                       "--gamma-minus-over-eps", "0.8", "--variant", "genuine")
    assert code == 0
    (c,) = json.loads(out)["clusters"]
    assert c["alg"] == 10


def test_fom_verify_table_reports_mismatch(capsys):
    code, out, _ = run(capsys, "fom", "--topology", "three_mode_linear", "--variant", "genuine",
                       "--verify-table")
    doc = json.loads(out)
    assert doc["meta"]["algebraic_match"] is True
    assert doc["clusters"][0]["expected_blocks"] == [9, 6, 6]
    # the oracle finds {5,5,5,3,1,1,1}, so the literal table does not match
    assert doc["clusters"][0]["observed_blocks"] == [5, 5, 5, 3, 1, 1, 1]
    assert code == 3


def test_propagate_identity_at_zero(capsys):
    code, out, _ = run(capsys, "propagate", "--topology", "two_mode", "--t", "0")
    assert code == 0
    rows = json.loads(out)["rows"]
    U = np.zeros((4, 4), dtype=complex)
    for r in rows:
        U[r["i"], r["j"]] = r["re"] + 1j * r["im"]
    assert np.array_equal(U, np.eye(4))


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# plane point\ntopology = three_mode_linear\nkappa-over-eps = 0.7071067811865476\n"
                   "gamma_minus_over_eps = 1.0\nformat = json\n")
    code, out, _ = run(capsys, "classify", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["clusters"][0]["blocks"] == [3, 3]
    code, out, _ = run(capsys, "classify", "--config", str(cfg), "--gamma-minus-over-eps", "0.2")
    assert all(c["blocks"] in ([1], [1, 1]) for c in json.loads(out)["clusters"])


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    assert run(capsys, "classify", "--config", str(cfg))[0] == 2
    assert run(capsys, "classify", "--config", str(tmp_path / "missing.cfg"))[0] == 1


def test_usage_errors(capsys):
    assert run(capsys, "classify", "--topology", "two_mode")[0] == 2
    assert run(capsys, "classify", "--kappa", "0.1", "--kappa-over-eps", "0.1")[0] == 2
    assert run(capsys, "spectrum", "--kappa", "0.1", "--gammas", "1,1", "--gamma-minus", "0.2")[0] == 2
    assert run(capsys, "scan", "--kappa-range", "0,1")[0] == 2


def test_io_error_exit_code(tmp_path, capsys):
    target = tmp_path / "missing" / "out.json"
    assert run(capsys, "classify", "--kappa", "0.1", "--output", str(target))[0] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bosonic_eps", "propagate", "--t", "0", "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "i,j,re,im"
