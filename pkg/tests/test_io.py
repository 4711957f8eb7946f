import json

import numpy as np
import pytest

from parabolic_lp.exceptions import DataError
from parabolic_lp.field import Field, Grid
from parabolic_lp.io import load_field, save_field


def test_binary_round_trip_is_bit_exact(tmp_path, rng):
    g = Grid.regular((16, 8), (-1, 0), (1, 3), "parabolic")
    f = Field(g, rng.normal(size=g.dims))
    header = save_field(f, tmp_path / "f")
    assert json.loads(header.read_text())["encoding"] == "bin"
    back = load_field(tmp_path / "f")
    assert back.grid == g
    assert np.array_equal(back.values, f.values)


def test_csv_round_trip(tmp_path, rng):
    g = Grid.regular((9, 5), (0, 0), (1, 1), "isotropic", periodic=False)
    f = Field(g, rng.normal(size=g.dims))
    save_field(f, tmp_path / "c", fmt="csv")
    back = load_field(tmp_path / "c.json")
    assert back.grid == g
    assert np.array_equal(back.values, f.values)


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_field(tmp_path / "nope")
