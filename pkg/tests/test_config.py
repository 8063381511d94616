import json

import pytest

from smoothlab.config import DEFAULT_GRID, KINDS, load_config, parse_config, repo_root, resolve_config
from smoothlab.errors import ConfigError


def test_minimal_config_defaults():
    cfg = parse_config({"kind": "equiv_2_3", "corpus": ["abs_sin"]})
    assert cfg.N == 1024
    assert cfg.p == ("2",)
    assert cfg.grid == DEFAULT_GRID
    assert cfg.seed == 0
    assert cfg.d == 1


def test_two_dimensional_defaults():
    cfg = parse_config({"kind": "equiv_3_4", "corpus": ["radial_2d", "constant"]})
    assert cfg.d == 2
    assert cfg.N == 256


def test_normalization():
    cfg = parse_config({"kind": "equiv_2_2", "corpus": "abs_sin", "p": [1, "Infinity", 2.0], "grid": [32, 8, 8, 16.0]})
    assert cfg.corpus == ("abs_sin",)
    assert cfg.p == ("1", "inf", "2")
    assert cfg.grid == (8, 16, 32)


@pytest.mark.parametrize(
    "doc",
    [
        [],
        {"kind": "equiv_9_9", "corpus": ["abs_sin"]},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "colour": "red"},
        {"kind": "equiv_2_3", "corpus": []},
        {"kind": "equiv_2_3", "corpus": ["bessel"]},
        {"kind": "equiv_3_4", "corpus": ["abs_sin", "radial_2d"]},
        {"kind": "equiv_2_3", "corpus": ["radial_2d"]},
        {"kind": "equiv_3_6", "corpus": ["abs_sin"]},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "N": 100},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "N": "64"},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "p": [0.5]},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "p": []},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "grid": [0, 8]},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "grid": [2.5]},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "seed": -1},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "seed": True},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "params": [1, 2]},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "params": {"r": float("nan")}},
        {"kind": "equiv_2_3", "corpus": ["abs_sin"], "d": 2},
    ],
)
def test_invalid_configs(doc):
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_wiener_scan_needs_no_corpus():
    cfg = parse_config({"kind": "wiener_scan", "params": {"r_max": 2}})
    assert cfg.corpus == ()


def test_overrides():
    cfg = parse_config({"kind": "equiv_2_3", "corpus": ["abs_sin"], "N": 64})
    new = cfg.with_overrides(seed=4, N=128, out="out")
    assert (new.seed, new.N, new.out) == (4, 128, "out")
    assert cfg.N == 64
    with pytest.raises(ConfigError):
        cfg.with_overrides(N=96)


def test_load_json_and_yaml(tmp_path):
    (tmp_path / "a.json").write_text(json.dumps({"kind": "equiv_2_3", "corpus": ["abs_sin"], "N": 64}), encoding="utf-8")
    (tmp_path / "b.yaml").write_text("kind: equiv_2_2\ncorpus: [abs_sin]\np: [2, inf]\n", encoding="utf-8")
    assert load_config(str(tmp_path / "a.json")).N == 64
    assert load_config(str(tmp_path / "b.yaml")).p == ("2", "inf")


def test_load_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))


def test_bundled_experiments_parse():
    ids = [p.stem for p in (repo_root() / "spec" / "experiments").iterdir()]
    assert set(ids) == set(KINDS)
    for exp_id in ids:
        path = resolve_config(exp_id)
        assert path.stem == exp_id
        assert load_config(exp_id).kind == exp_id
