import json

import numpy as np
import pytest

from app.cli import EXIT_FAILURE, EXIT_INVALID, EXIT_OK, main
from app.services.image_io import write_image

SMALL_SWEEP = ["prox-compare", "--betas", "1,50", "--size", "20", "--zero-block", "3", "--bcs", "zero"]


def test_prox_compare_csv_is_deterministic(capsys):
    assert main(SMALL_SWEEP) == EXIT_OK
    first = capsys.readouterr().out
    assert main(SMALL_SWEEP) == EXIT_OK
    assert capsys.readouterr().out == first

    lines = first.strip().splitlines()
    assert lines[0] == "BC,beta,ReE of f,ReE of X,MAE of X,regime"
    assert len(lines) == 3
    assert lines[1].startswith("zero,1.000000e+00")
    assert lines[1].endswith("exact_small_beta")


def test_prox_compare_writes_reports(tmp_path, capsys):
    assert main(SMALL_SWEEP + ["--out", str(tmp_path)]) == EXIT_OK
    csv = capsys.readouterr().out
    assert (tmp_path / "prox_compare.csv").read_text() == csv
    payload = json.loads((tmp_path / "prox_compare.json").read_text())
    assert payload["config"]["betas"] == [1.0, 50.0]
    assert [row["beta"] for row in payload["rows"]] == [1.0, 50.0]


def test_json_config_overrides_flags(tmp_path, capsys):
    config = tmp_path / "sweep.json"
    config.write_text(json.dumps({"betas": [50.0]}))
    assert main(SMALL_SWEEP + ["--config", str(config)]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("zero,5.000000e+01")


def test_weights_from_csv(tmp_path, capsys):
    weights = tmp_path / "w.csv"
    weights.write_text("1,2,1\n2,4,2\n1,2,1\n")
    argv = SMALL_SWEEP + ["--weights", str(weights)]
    assert main(argv) == EXIT_OK
    assert len(capsys.readouterr().out.strip().splitlines()) == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["prox-compare", "--betas", "0,5"],
        ["prox-compare", "--size", "5", "--zero-block", "9"],
        ["deblur", "--model", "atv-l2"],
        ["deblur", "--synthetic", "32", "--gamma", "1.7"],
    ],
)
def test_invalid_configuration(argv, capsys):
    assert main(["--log-level", "CRITICAL"] + argv) == EXIT_INVALID
    diagnostic = json.loads(capsys.readouterr().err)
    assert diagnostic["error"] == "ValidationError"


def test_deblur_reproducible_runs_are_identical(tmp_path, capsys):
    argv = [
        "deblur",
        "--synthetic", "32",
        "--kernel", "delta",
        "--reproducible",
        "--out", str(tmp_path),
    ]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    first_report = (tmp_path / "report.json").read_bytes()
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first
    assert (tmp_path / "report.json").read_bytes() == first_report

    report = json.loads(first)
    assert report["solve"]["elapsed"] is None
    assert report["solve"]["converged"]
    assert report["kernel"] == "delta"
    assert report["bsnr_clean"] == pytest.approx(40.0)
    assert (tmp_path / "restored.png").exists()
    assert (tmp_path / "degraded.png").exists()


def test_metrics(tmp_path, capsys):
    image = write_image(tmp_path / "a.png", np.full((8, 8), 0.6))
    reference = write_image(tmp_path / "b.pgm", np.full((8, 8), 0.4))
    assert main(["metrics", str(image), str(reference)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["psnr"] == pytest.approx(20.0 * np.log10(5.0))
    assert report["rel_err"] == pytest.approx(0.5)
    assert report["mae"] == pytest.approx(0.2)
    assert report["shape"] == [8, 8]


def test_identical_images_report_null_psnr(tmp_path, capsys):
    image = write_image(tmp_path / "a.png", np.full((4, 4), 0.4))
    assert main(["metrics", str(image), str(image)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["psnr"] is None


@pytest.mark.parametrize(
    "argv",
    [
        ["metrics", "missing.png", "other.png"],
        ["deblur", "--image", "missing.png"],
        ["deblur", "--synthetic", "32", "--kernel", "box:3"],
    ],
)
def test_domain_failures(argv, capsys):
    assert main(["--log-level", "CRITICAL"] + argv) == EXIT_FAILURE
    assert "error" in json.loads(capsys.readouterr().err)


def test_prox_compare_exact_rows(capsys):
    assert main(["prox-compare", "--betas", "1,50", "--bcs", "zero,periodic"]) == EXIT_OK
    header, *rows = capsys.readouterr().out.strip().splitlines()
    columns = header.split(",")
    assert len(rows) == 4
    for line in rows:
        row = dict(zip(columns, line.split(",")))
        if float(row["beta"]) == 1.0:
            assert float(row["ReE of f"]) <= 1e-10
            assert row["ReE of X"] == ""
        else:
            assert float(row["ReE of f"]) <= 1e-5


def test_deblur_without_blur_or_noise_recovers_the_image(capsys):
    argv = ["deblur", "--synthetic", "32", "--kernel", "delta", "--bsnr", "inf", "--reproducible"]
    assert main(argv) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["solve"]["converged"]
    assert report["solve"]["rel_err"] <= 1e-3
    assert report["bsnr_clean"] is None


@pytest.mark.parametrize(
    "model, gain",
    [("atv-l2", 2.0), ("itv-l2", 2.0), ("atv-l1", 5.0), ("itv-l1", 5.0)],
)
def test_deblur_pipeline_improves_psnr(model, gain, capsys):
    argv = ["deblur", "--model", model, "--synthetic", "256", "--sp-level", "0.3", "--reproducible"]
    assert main(argv) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["solve"]["converged"]
    assert report["solve"]["psnr"] >= report["degraded_psnr"] + gain


def test_report_files_repeat_without_the_reproducible_flag(tmp_path, capsys):
    argv = ["deblur", "--synthetic", "32", "--kernel", "delta", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["solve"]["elapsed"] is not None
    first = (tmp_path / "report.json").read_bytes()
    assert main(argv) == EXIT_OK
    capsys.readouterr()
    assert (tmp_path / "report.json").read_bytes() == first
    assert json.loads(first)["solve"]["elapsed"] is None
