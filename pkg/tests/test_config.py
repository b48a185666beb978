"""INI configuration parsing, round trips and assumption validation."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldclt.config import ExperimentConfig, WeightSection, dump_config, load_config, parse_config, validate_config
from fieldclt.exceptions import ConfigError

EXAMPLE = """
[experiment]
mode = hermite2
ladder = 8, 16, 32
replications = 500
seed = 20240601
pairs = 0:0.25, 0.5:1

[body]
kind = ball
dimension = 2

[density]
family = gaussian_type
s = 0.5
"""


def test_parse_example():
    cfg = parse_config(EXAMPLE)
    assert cfg.experiment.mode == "hermite2"
    assert cfg.experiment.ladder == (8.0, 16.0, 32.0)
    assert cfg.experiment.pairs == ((0.0, 0.25), (0.5, 1.0))
    assert cfg.build_body().kind == "ball"
    assert cfg.build_density().s == 0.5
    assert cfg.weight is None


@pytest.mark.parametrize("text", ["[exp]\nmode = base\n", "[experiment]\nmoed = base\n",
                                  "[experiment]\nreplications = many\n", "not ini at all ["])
def test_malformed_configs_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


_pos = st.floats(0.01, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(
    ladder=st.lists(_pos, min_size=1, max_size=5).map(lambda x: tuple(sorted(set(x)))),
    h=st.one_of(st.none(), _pos),
    seed=st.integers(0, 2 ** 64 - 1),
    alpha=_pos, c=_pos,
    kind=st.sampled_from(["cube", "ball", "rectangle"]),
    dim=st.integers(1, 3),
    svg=st.booleans(),
    weight=st.one_of(st.none(), st.builds(WeightSection, nu=_pos, gamma=_pos)),
    pairs=st.lists(st.tuples(st.floats(0, 0.5), st.floats(0.5, 1)), min_size=1, max_size=4).map(tuple),
)
def test_dump_parse_round_trip(ladder, h, seed, alpha, c, kind, dim, svg, weight, pairs):
    cfg = ExperimentConfig()
    cfg = cfg.override("experiment", ladder=ladder, h=h, seed=seed, pairs=pairs)
    cfg = cfg.override("density", alpha=alpha, c=c)
    cfg = cfg.override("body", kind=kind, dimension=dim, half_widths=(0.5,) * dim if kind == "rectangle" else ())
    cfg = cfg.override("output", svg=svg)
    if weight is not None:
        cfg = cfg.override("weight", nu=weight.nu, gamma=weight.gamma)
    text = dump_config(cfg)
    back = parse_config(text)
    assert back == cfg
    assert dump_config(back) == text


def test_override_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        ExperimentConfig().override("body", radius=2.0)


def _labels(cfg, severity="error"):
    return sorted({v.assumption for v in validate_config(cfg) if v.severity == severity})


def test_validate_defaults_clean():
    assert _labels(ExperimentConfig()) == []


def test_validate_ball_has_no_kernel_violation():
    cfg = ExperimentConfig().override("body", kind="ball", dimension=2)
    assert "K" not in _labels(cfg)
    assert "K" not in _labels(cfg, "notice")
    cfg = cfg.override("experiment", p_values=(1.2, 2.0))
    assert _labels(cfg, "notice") == ["K"]


def test_validate_reports_each_assumption():
    cfg = ExperimentConfig().override("density", family="band_pass")
    assert _labels(cfg) == ["B"]
    cfg = ExperimentConfig().override("density", alpha=0.2)
    assert _labels(cfg) == ["A"]
    cfg = ExperimentConfig().override("experiment", mode="weighted")
    assert _labels(cfg) == ["C", "D"]
    assert _labels(cfg, "notice") == ["E"]
    cfg = cfg.override("weight", family="power_norm").override("body", anchored=True)
    assert _labels(cfg) == []
    cfg = ExperimentConfig().override("experiment", ladder=(), replications=3)
    assert _labels(cfg) == ["config"]
