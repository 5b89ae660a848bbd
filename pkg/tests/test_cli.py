import csv
import json

import pytest

from ssckit.cli import main


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def five_user_files(tmp_path):
    model = write_json(tmp_path / "model.json",
                       {"sigma_x2": 2.0,
                        "noise_vars": [1.0, 0.8, 0.9, 0.7, 0.6]})
    structure = write_json(tmp_path / "structure.json",
                           {"threshold": {"L": 5, "t": 5}})
    return model, structure


def test_region_command(five_user_files, capsys):
    model, structure = five_user_files
    code = main(["region", "--model", model, "--structure", structure,
                 "--distortion", "0.1"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["region"]["r_min"] == pytest.approx(0.2618, abs=1e-3)
    assert payload["region"]["case_tag"] == "G1"


def test_region_sweep_endpoints(five_user_files, tmp_path, capsys):
    model, structure = five_user_files
    code = main(["region", "--model", model, "--structure", structure,
                 "--distortion", "0.1", "--sweep", "tr_a:0:9.5:20",
                 "--out", str(tmp_path), "--precision", "full"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    with open(tmp_path / "region_sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 20
    first, last = rows[0], rows[-1]
    # zero authorized precision: full rate-distortion rate, no side-info gain
    assert float(first["r_min"]) == pytest.approx(2.1610, abs=1e-4)
    # at the onset of degeneracy the rate floor hits zero and leakage is the
    # unaided information of the model's strongest colluding set
    assert float(last["r_min"]) == 0.0
    import math
    tr_b = payload["region"]["tr_b"]
    assert float(last["delta_min"]) == pytest.approx(
        0.5 * math.log2(1 + 2.0 * tr_b), abs=1e-9)
    assert (tmp_path / "region_sweep.png").exists()


def test_region_malformed_json(tmp_path, capsys):
    bad = tmp_path / "model.json"
    bad.write_text("{not json")
    structure = write_json(tmp_path / "s.json", {"threshold": {"L": 2, "t": 1}})
    code = main(["region", "--model", str(bad), "--structure", structure,
                 "--distortion", "0.1"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_region_bad_sweep_spec(five_user_files, capsys):
    model, structure = five_user_files
    code = main(["region", "--model", model, "--structure", structure,
                 "--distortion", "0.1", "--sweep", "bogus:0:1:5"])
    assert code == 2
    capsys.readouterr()


def test_threshold_command(five_user_files, tmp_path, capsys):
    model, _ = five_user_files
    code = main(["threshold", "--model", model, "--distortion", "0.1",
                 "--out", str(tmp_path), "--no-plot"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdicts_consistent"] is True
    with open(tmp_path / "threshold_rows.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["t"] for r in rows] == ["1", "2", "3", "4", "5"]
    assert (tmp_path / "threshold_verdicts.csv").exists()


def test_threshold_bad_range(five_user_files, capsys):
    model, _ = five_user_files
    code = main(["threshold", "--model", model, "--distortion", "0.1",
                 "--t-range", "2:9"])
    assert code == 2
    capsys.readouterr()


def test_threshold_plot_written(five_user_files, tmp_path, capsys):
    model, _ = five_user_files
    code = main(["threshold", "--model", model, "--distortion", "0.1",
                 "--out", str(tmp_path)])
    assert code == 0
    capsys.readouterr()
    assert (tmp_path / "threshold_rows.png").exists()


def test_verify_command(tmp_path, capsys):
    code = main(["verify", "--seed", "3", "--trials", "10000",
                 "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["all_passed"] is True
    assert payload["num_checks"] > 100
    assert (tmp_path / "verify_report.json").exists()


def test_simulate_builtin(tmp_path, capsys):
    code = main(["simulate", "--spec", "builtin:binary-symmetric",
                 "--n", "8", "--trials", "40", "--seed", "3",
                 "--samples", "120", "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["trials"] == 40
    assert "1" in payload["leakage"] and "2" in payload["leakage"]
    assert (tmp_path / "sim_result.json").exists()
    assert (tmp_path / "sim_result.png").exists()


def test_simulate_spec_file_and_resource_exit(tmp_path, capsys):
    from ssckit.cli import builtin_binary_bundle
    spec_path = write_json(tmp_path / "spec.json", builtin_binary_bundle())
    code = main(["simulate", "--spec", spec_path, "--n", "8", "--trials", "10",
                 "--samples", "50", "--no-plot"])
    assert code == 0
    capsys.readouterr()
    # oversize index space maps to the numeric/resource exit code
    code = main(["simulate", "--spec", spec_path, "--n", "30", "--trials", "10",
                 "--rates", "1.0,0,0,0"])
    assert code == 3
    capsys.readouterr()


def test_simulate_structure_flag_overrides_embedded(tmp_path, capsys):
    from ssckit.cli import builtin_binary_bundle
    spec_path = write_json(tmp_path / "spec.json", builtin_binary_bundle())
    structure = write_json(tmp_path / "t1.json", {"threshold": {"L": 2, "t": 1}})
    code = main(["simulate", "--spec", spec_path, "--structure", structure,
                 "--n", "8", "--trials", "10", "--samples", "40", "--no-plot"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    # t=1 collusion family is just the empty set
    assert list(payload["leakage"]) == ["empty"]
    assert "1" in payload["mean_distortion"] and "2" in payload["mean_distortion"]


def test_simulate_missing_structure(tmp_path, capsys):
    from ssckit.cli import builtin_binary_bundle
    data = builtin_binary_bundle()
    del data["structure"]
    spec_path = write_json(tmp_path / "spec.json", data)
    code = main(["simulate", "--spec", spec_path, "--n", "8"])
    assert code == 2
    capsys.readouterr()


def test_example_bundle(tmp_path, capsys):
    code = main(["example", "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    for name in ("example_fig2.csv", "example_fig3.csv", "example_fig2.png",
                 "example_fig3.png", "binary_spec.json", "example_model.json"):
        assert (tmp_path / name).exists(), name
    del payload
    with open(tmp_path / "example_fig3.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["t"] for r in rows] == ["2", "3", "4", "5"]
    rates = [float(r["r_min"]) for r in rows]
    assert rates == sorted(rates, reverse=True)


def test_precision_rounding(five_user_files, capsys):
    model, structure = five_user_files
    main(["region", "--model", model, "--structure", structure,
          "--distortion", "0.1"])
    rounded = json.loads(capsys.readouterr().out)["region"]["tr_a"]
    main(["region", "--model", model, "--structure", structure,
          "--distortion", "0.1", "--precision", "full"])
    full = json.loads(capsys.readouterr().out)["region"]["tr_a"]
    assert rounded == float(f"{full:.6g}")
    assert full != rounded
