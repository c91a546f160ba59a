import json

import numpy as np
import pytest

from fracsde.hurst import TimeGrid
from fracsde.io import (meta_path, read_csv, read_path, write_csv, write_decomposition,
                        write_json, write_path)
from fracsde.likelihood import decompose
from fracsde.paths import example_model, simulate_sde
from fracsde.rng import derive_seed, make_rng


def test_path_roundtrip(tmp_path):
    p = simulate_sde(example_model(), 0.7, 0.3, TimeGrid(5.0, 100), 5)
    write_path(p, tmp_path / "p.csv", {"config_hash": "abc", "seed": 5})
    q = read_path(tmp_path / "p.csv")
    assert np.array_equal(p.values, q.values)
    assert q.grid == p.grid and q.true_params == (0.7, 0.3) and q.seed == 5
    meta = json.loads(meta_path(tmp_path / "p.csv").read_text())
    assert meta["config_hash"] == "abc" and meta["model"] == "example"


def test_read_path_errors(tmp_path):
    with pytest.raises(FileNotFoundError, match="missing.csv"):
        read_path(tmp_path / "missing.csv")
    (tmp_path / "bad.csv").write_text("i,t,x\n0,0,0\n")
    with pytest.raises(ValueError, match="header"):
        read_path(tmp_path / "bad.csv")
    (tmp_path / "gap.csv").write_text("index,t,x\n0,0,0\n2,1,0\n")
    with pytest.raises(ValueError, match="index"):
        read_path(tmp_path / "gap.csv")


def test_csv_provenance_and_atomic(tmp_path):
    dest = tmp_path / "sub" / "t.csv"
    write_csv(dest, ("a", "b"), [(1, 0.1), (True, 2.5)], {"seed": 3})
    header, rows, prov = read_csv(dest)
    assert header == ["a", "b"] and rows == [["1", "0.1"], ["1", "2.5"]] and prov == {"seed": "3"}
    assert [f.name for f in dest.parent.iterdir()] == ["t.csv"]


def test_json_nan_becomes_null(tmp_path):
    write_json(tmp_path / "s.json", {"x": float("nan"), "y": np.float64(1.5)})
    assert json.loads((tmp_path / "s.json").read_text()) == {"x": None, "y": 1.5}


def test_decomposition_export(tmp_path):
    p = simulate_sde(example_model(), 0.7, 0.5, TimeGrid(1.0, 10), 1)
    write_decomposition(decompose(p, example_model(), 0.7, 0.5), p.grid, tmp_path / "d.csv")
    header, rows, _ = read_csv(tmp_path / "d.csv")
    assert header == ["i", "t", "delta_z", "delta_g", "delta_m", "v_sq"] and len(rows) == 10


def test_derived_seeds():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert len({derive_seed(1, r) for r in range(100)}) == 100
    assert derive_seed(1, 2) != derive_seed(2, 1)
    assert make_rng(5).random() == make_rng(5).random()
