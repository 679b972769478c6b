import csv
import json

import numpy as np
import pytest

from mrsim.cli import main
from mrsim.field import GridSpec, MultiFieldDataset, load_dataset, save_dataset
from mrsim.oracle import rasterized_component_oracle
from mrsim.synthetic import blobs, random_smooth


def write(ds, path):
    save_dataset(ds, path)
    return str(path)


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_build_constant(tmp_path):
    src = write(MultiFieldDataset(GridSpec((2, 2)), np.ones((4, 1))), tmp_path / "c.mrsf")
    assert main(["build", src, "--levels", "1", "--out", str(tmp_path / "o")]) == 0
    data = json.loads((tmp_path / "o" / "mrs.json").read_text())
    assert len(data["levels"]) == 1 and len(data["levels"][0]["nodes"]) == 1


def test_build_ring_height(tmp_path):
    assert main(["gen-synthetic", "ring-height", "--out", str(tmp_path)]) == 0
    out = tmp_path / "b"
    assert main(["build", str(tmp_path / "ring-height.mrsf"), "--levels", "3", "--out", str(out)]) == 0
    for k in range(3):
        for name in (f"jcn_{k}.json", f"jcn_{k}.dot", f"mdrg_{k}.json"):
            assert (out / name).exists()
    jcn1 = json.loads((out / "jcn_1.json").read_text())
    assert len(jcn1["nodes"]) == 6
    ds = load_dataset(tmp_path / "ring-height.mrsf")
    assert sum(rasterized_component_oracle(ds, 1).values()) == 6


def test_missing_file(tmp_path, capsys):
    assert main(["build", str(tmp_path / "nope.mrsf")]) == 2
    assert "nope.mrsf" in capsys.readouterr().err


def test_usage_errors(tmp_path, capsys):
    src = write(random_smooth(seed=1), tmp_path / "a.mrsf")
    assert main(["build", src, "--levels", "0"]) == 1
    assert main(["compare", src, src, "--weights", "0.5,0.5,0.5,0.5"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    assert main(["gen-synthetic", "splitting-blobs", "--split-step", "0", "--out", str(tmp_path)]) == 1


def test_compare_identical(tmp_path, capsys):
    src = write(random_smooth(seed=2), tmp_path / "a.mrsf")
    assert main(["compare", src, src, "--out", str(tmp_path / "o")]) == 0
    assert capsys.readouterr().out.strip() == "1.000000000"
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["phi_bar"] == pytest.approx(1.0, abs=1e-9)
    mpair = json.loads((tmp_path / "o" / "mpair.json").read_text())
    assert set(mpair[0]) == {"level", "f_node", "g_node", "phi"}


def test_compare_one_vs_two_blobs(tmp_path, capsys):
    a = write(blobs(centres=((0.0, 0.0),)), tmp_path / "one.mrsf")
    b = write(blobs(centres=((-0.5, 0.0), (0.5, 0.0))), tmp_path / "two.mrsf")
    assert main(["compare", a, b, "--out", str(tmp_path), "--format", "csv"]) == 0
    assert float(capsys.readouterr().out) < 1.0
    assert (tmp_path / "report.csv").read_text().startswith("k,phi_level,pairs")


def test_compare_field_mismatch(tmp_path):
    a = write(random_smooth(n_fields=1, seed=1), tmp_path / "s.mrsf")
    b = write(random_smooth(n_fields=2, seed=1), tmp_path / "b.mrsf")
    assert main(["compare", a, b, "--out", str(tmp_path)]) == 2


def test_timeseries_identical_and_two_steps(tmp_path):
    src = write(random_smooth(seed=3), tmp_path / "a.mrsf")
    out = tmp_path / "o"
    assert main(["timeseries", src, src, src, "--levels", "2", "--out", str(out)]) == 0
    got = rows(out / "timeseries.csv")
    assert list(got[0]) == ["step", "level_count", "weight_preset", "phi_bar"]
    assert all(r["phi_bar"] == "1.000000000" for r in got)
    out2 = tmp_path / "o2"
    assert main(["timeseries", src, src, "--levels", "2", "--weights", "equal", "--out", str(out2)]) == 0
    assert len(rows(out2 / "timeseries.csv")) == 1


def test_timeseries_bad_step(tmp_path, capsys):
    src = write(random_smooth(seed=3), tmp_path / "a.mrsf")
    assert main(["timeseries", src, str(tmp_path / "gone.mrsf"), "--out", str(tmp_path)]) == 2
    assert "step 1" in capsys.readouterr().err


def test_splitting_blobs_pipeline(tmp_path, capsys, monkeypatch):
    gen = tmp_path / "series"
    assert main(["gen-synthetic", "splitting-blobs", "--out", str(gen)]) == 0
    files = sorted(str(p) for p in gen.glob("*.mrsf"))
    assert len(files) == 10
    b5 = rasterized_component_oracle(load_dataset(files[5]), 2)
    b6 = rasterized_component_oracle(load_dataset(files[6]), 2)
    assert b5[(3, 3)] == 1 and b6[(3, 3)] == 2
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("MRS_THREADS", threads)
        out = tmp_path / f"ts{threads}"
        assert main(["timeseries", *files, "--levels", "1,3", "--out", str(out)]) == 0
        outs.append((out / "timeseries.csv").read_bytes())
    assert outs[0] == outs[1]
    arg = rows(tmp_path / "ts1" / "argmin.csv")
    assert {r["argmin_step"] for r in arg if r["level_count"] == "3"} == {"5"}


def test_gen_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["gen-synthetic", "random-smooth", "--seed", "7", "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "random-smooth.mrsf").read_bytes() == (tmp_path / "b" / "random-smooth.mrsf").read_bytes()
