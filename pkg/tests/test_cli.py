import json
import math

import pytest

from szegolab.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_dims_csv(capsys):
    code, out, _ = run_cli(capsys, "dims", "--preset", "sphere", "--n", "2", "--m", "0..10")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "m,d_m"
    for line in lines[1:]:
        m, d = map(int, line.split(","))
        assert d == m + 1


def test_norms_table(capsys):
    code, out, _ = run_cli(capsys, "norms", "--preset", "sphere", "--n", "2", "--m", "0..1")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "m,alpha,rational,pi_power,value"
    first = lines[1].split(",")
    assert first[2] == "2" and first[3] == "2"  # volume 2 pi^2


def test_fit_contract_passes(capsys):
    code, out, _ = run_cli(
        capsys, "fit", "--preset", "sphere", "--n", "2", "--m", "20..60", "--point", "1,0"
    )
    assert code == 0
    report = json.loads(out)
    assert report["passed"]
    assert report["results"]["relative_error"] <= 0.01
    assert report["results"]["predicted"] == pytest.approx(1 / (2 * math.pi**2))
    assert "config_hash" in report and "manifold_hash" in report


def test_fit_contract_failure_exits_one(capsys):
    code, out, err = run_cli(
        capsys,
        "fit", "--weights", "1,2", "--point", "0,1", "--m", "20..40",
        "--samples", "20000", "--tolerance", "fit=1e-9",
    )
    assert code == 1
    assert "CONTRACT FAILED" in err
    assert "leading-coefficient" in err


def test_vanish_certificate(capsys):
    code, out, _ = run_cli(capsys, "vanish", "--weights", "1,2", "--point", "0,1", "--m", "3")
    assert code == 0
    report = json.loads(out)
    assert report["results"]["max_abs_value"] == 0.0
    assert report["results"]["stratum_order"] == 2


def test_vanish_rejects_divisible_levels(capsys):
    code, _, err = run_cli(capsys, "vanish", "--weights", "1,2", "--point", "0,1", "--m", "4")
    assert code == 2
    assert "configuration error" in err


def test_project_polynomial(capsys, tmp_path):
    func = tmp_path / "func.json"
    func.write_text(
        json.dumps(
            [
                {"coeff": "1", "z_exponents": [1, 0], "zbar_exponents": [0, 0]},
                {"coeff": "1", "z_exponents": [0, 2], "zbar_exponents": [1, 0]},
            ]
        )
    )
    # z1 + zbar1 z2^2 under weights (1, 2): orbit degrees 1 and 3
    code, out, _ = run_cli(
        capsys, "project", "--weights", "1,2", "--point", "0.6,0.8",
        "--m", "0..4", "--function", str(func),
    )
    assert code == 0
    rows = {int(r.split(",")[0]): complex(float(r.split(",")[1]), float(r.split(",")[2]))
            for r in out.strip().splitlines()[1:]}
    assert abs(rows[1] - 0.6) < 1e-12
    assert abs(rows[3] - 0.6 * 0.8**2) < 1e-12
    assert abs(rows[0]) < 1e-12 and abs(rows[2]) < 1e-12 and abs(rows[4]) < 1e-12


def test_embed_certificate(capsys, tmp_path):
    out_dir = tmp_path / "reports"
    code, out, _ = run_cli(
        capsys, "embed", "--weights", "1,2", "--m", "4", "--m0", "3",
        "--pairs", "600", "--out", str(out_dir),
    )
    assert code == 0
    report = json.loads(out)
    r = report["results"]
    assert r["levels"] == [4, 5, 8, 10]
    assert r["N"] == 17
    assert r["min_weight"] == 4
    assert r["immersion_floor"] > 1e-6
    assert r["violations"] == []
    assert (out_dir / "embed.json").exists()
    assert (out_dir / "embed.csv").read_text().startswith("sample,label,")


def test_embed_extra_levels(capsys):
    code, out, _ = run_cli(
        capsys, "embed", "--weights", "1,2", "--m", "4", "--extra-levels", "7",
        "--pairs", "300", "--immersion-samples", "20",
    )
    assert code == 0
    assert json.loads(out)["results"]["levels"] == [4, 5, 7, 8, 10]


def test_ratio_search_cli(capsys):
    code, out, _ = run_cli(
        capsys, "ratio", "--weights", "1,2", "--point", "0,1", "--m", "30",
        "--radii", "0.1", "--points", "15", "--samples", "60000",
    )
    assert code == 0
    report = json.loads(out)
    assert report["results"]["passing_m"] == 30


def test_kernel_values(capsys):
    code, out, _ = run_cli(
        capsys, "kernel", "--preset", "sphere", "--n", "2", "--m", "3..5",
        "--point", "1,0", "--point2", "0,1",
    )
    assert code == 0
    report = json.loads(out)
    assert report["passed"]


def test_manifold_json_input(capsys, tmp_path):
    from szegolab.geometry import Manifold

    spec = tmp_path / "m.json"
    spec.write_text(json.dumps(Manifold.sphere(2, (1, 2)).to_spec()))
    code, out, _ = run_cli(capsys, "dims", "--manifold", str(spec), "--m", "4")
    assert code == 0
    assert out.strip().splitlines()[1] == "4,3"


def test_config_error_exit_two(capsys):
    code, _, err = run_cli(capsys, "fit", "--m", "20..60")
    assert code == 2
    assert "configuration error" in err


def test_reports_byte_identical(capsys, tmp_path):
    args = ["fit", "--weights", "1,2", "--point", "0,1", "--m", "20..32",
            "--samples", "20000", "--seed", "5", "--tolerance", "fit=0.5"]
    d1, d2 = tmp_path / "a", tmp_path / "b"
    code1, out1, _ = run_cli(capsys, *args, "--out", str(d1))
    code2, out2, _ = run_cli(capsys, *args, "--out", str(d2))
    assert code1 == code2 == 0
    assert out1 == out2
    assert (d1 / "fit.json").read_bytes().replace(str(d1).encode(), b"") == (
        d2 / "fit.json"
    ).read_bytes().replace(str(d2).encode(), b"")
    assert (d1 / "fit.csv").read_bytes() == (d2 / "fit.csv").read_bytes()
