import json

import numpy as np
import pytest
import yaml

from qfeature import cli, qfs

BASE = {
    "version": 1,
    "grid": {"num_steps": 128},
    "realisations": 20,
    "noise": [{"family": "1/f"}, {"family": "coloured", "stationary": False}],
    "references": [{"family": "1/f"}, {"family": "coloured"}],
    "pulse": {"factory": "ideal"},
    "dataset": {"count": 6, "peak_bin": [0, 64]},
    "train": {"folds": 2, "k": 1},
    "refine": {"grid": [8, 16, 32, 48], "budget": 1,
               "template": {"family": "1/f+bump", "peak_bin": 16}},
}


def write_cfg(tmp_path, **changes):
    cfg = dict(BASE, output=str(tmp_path / "out"), **changes)
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def run(*argv):
    return cli.main(list(argv) + ["--workers", "1"])


def test_zero_noise_gives_identity_point(tmp_path):
    cfg = write_cfg(tmp_path, noise=[{"family": "1/f", "scale_factor": 0.0}],
                    pulse={"factory": "realistic", "count": 2})
    assert run("simulate", "--config", cfg) == 0
    pts = qfs.read_csv(tmp_path / "out" / "points.csv")
    assert len(pts) == 2
    for p in pts:
        assert np.allclose(p.features, qfs.IDENTITY_POINT, atol=1e-9)


def test_rerun_is_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path)
    assert run("simulate", "--config", cfg, "--seed", "9") == 0
    first = (tmp_path / "out" / "points.csv").read_bytes()
    assert run("simulate", "--config", cfg, "--seed", "9") == 0
    assert (tmp_path / "out" / "points.csv").read_bytes() == first
    runs = json.loads((tmp_path / "out" / "runs.json").read_text())
    assert len(runs) == 2


def test_invalid_config_exits_nonzero(tmp_path, capsys):
    cfg = write_cfg(tmp_path, realisations=0)
    assert run("simulate", "--config", cfg) == 2
    assert "realisations" in capsys.readouterr().err
    cfg = write_cfg(tmp_path, surprise=1)
    assert run("simulate", "--config", cfg) == 2


def test_malformed_csv_names_cell(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    bad = tmp_path / "bad.csv"
    bad.write_text(",".join(qfs.FEATURE_NAMES) + "\n" + ",".join(["0"] * 4 + ["oops"] + ["0"] * 4) + "\n")
    assert run("classify", "--config", cfg, "--unknown", str(bad)) == 1
    err = capsys.readouterr().err
    assert "row 2" in err and "beta_y" in err


def test_classify_from_simulated_points(tmp_path):
    cfg = write_cfg(tmp_path, noise=[{"family": "coloured"}], pulse={"factory": "realistic", "count": 3})
    assert run("simulate", "--config", cfg) == 0
    unknown = str(tmp_path / "out" / "points.csv")
    assert run("classify", "--config", cfg, "--unknown", unknown) == 0
    lines = (tmp_path / "out" / "distances.csv").read_text().splitlines()
    assert lines[0] == "label,d_x,d_y,d_z,total"
    assert len(lines) == 3


def test_refine_runs(tmp_path):
    cfg = write_cfg(tmp_path, noise=[{"family": "1/f+bump", "peak_bin": 20}])
    assert run("simulate", "--config", cfg) == 0
    assert run("refine", "--config", cfg, "--unknown", str(tmp_path / "out" / "points.csv")) == 0
    res = json.loads((tmp_path / "out" / "refine.json").read_text())
    assert len(res["stages"]) == 1


def test_dataset_and_train(tmp_path):
    cfg = write_cfg(tmp_path)
    assert run("dataset", "--config", cfg) == 0
    assert len((tmp_path / "out" / "dataset.csv").read_text().splitlines()) == 7
    assert run("train", "--config", cfg) == 0
    rep = json.loads((tmp_path / "out" / "train_report.json").read_text())
    assert set(rep) >= {"noise_type", "stationarity"}


def test_pulse_width_sweep(tmp_path):
    cfg = write_cfg(tmp_path, noise=[{"family": "1/f"}],
                    sweep={"study": "pulse-width", "values": [24, 36, 48, 60, 72, 96]})
    assert run("sweep", "--config", cfg) == 0
    assert len(qfs.read_csv(tmp_path / "out" / "sweep.csv")) == 6


def test_energy_sweep_zero_scale(tmp_path):
    cfg = write_cfg(tmp_path, noise=[{"family": "1/f"}], sweep={"study": "energy", "values": [0.0, 1.0]})
    assert run("sweep", "--config", cfg) == 0
    pts = qfs.read_csv(tmp_path / "out" / "sweep.csv")
    assert np.allclose(pts[0].features, qfs.IDENTITY_POINT, atol=1e-9)
    assert not np.allclose(pts[1].features, qfs.IDENTITY_POINT, atol=1e-3)


def test_empty_sweep_list_is_error(tmp_path):
    cfg = write_cfg(tmp_path, sweep={"study": "energy", "values": []})
    assert run("sweep", "--config", cfg) == 1


def test_bench(tmp_path):
    cfg = write_cfg(tmp_path, realisations=8, grid={"num_steps": 64})
    assert run("bench", "--config", cfg, "--repeats", "1") == 0
    data = json.loads((tmp_path / "out" / "bench.json").read_text())
    assert data["meta"]["speedup"]
