import pytest

from logconf.config import ExperimentConfig, config_from_dict, parse_config
from logconf.constitutive import Model
from logconf.errors import ConfigError, ParseError, ValidationError


def test_minimal_verify_config_defaults():
    cfg = parse_config('kind = "verify"\n')
    assert cfg.kind == "verify" and cfg.seed == 0 and cfg.dim == 3
    assert cfg.output_path == "verify.csv"
    assert cfg.model.model is Model.OLDROYD_B and cfg.model.lam == 1.0
    assert cfg.tolerances.verify_cases == 20 and cfg.tolerances.newton.abs_tol == 1e-12
    assert cfg.wake.profile is not None and cfg.transient.dt == 1e-3
    assert parse_config("", "verify") == cfg


def test_alpha_out_of_range():
    with pytest.raises(ValidationError) as info:
        parse_config('[model]\nname = "giesekus"\nalpha = 1.5\n')
    assert any("alpha ∈ [0,1]" in v for v in info.value.violations)


def test_giesekus_alpha_default():
    assert parse_config('[model]\nname = "giesekus"\n').model.alpha == 0.1


def test_alpha_with_oldroyd_b_rejected():
    with pytest.raises(ValidationError, match="must be 0 for oldroyd-b"):
        parse_config("[model]\nalpha = 0.2\n")


def test_sweep_over_tabulated_range_accepted():
    wis = ", ".join(f"{0.1 * k:.1f}" for k in range(1, 15))
    cfg = parse_config(f'kind = "sweep"\nwi_list = [{wis}]\n[model]\nname = "oldroyd-b"\n')
    assert cfg.wi_list[0] == 0.1 and cfg.wi_list[-1] == 1.4 and len(cfg.wi_list) == 14


def test_all_violations_reported():
    text = """
kind = "sweep"
dim = 4
wi_list = [0.3, 0.2]
[model]
lambda = -1.0
[flow]
type = "planar"
[transient]
t_end = 1.0
dt = 0.3
"""
    with pytest.raises(ValidationError) as info:
        parse_config(text)
    joined = "\n".join(info.value.violations)
    for field in ("dim", "wi_list", "model.lambda", "flow.type", "transient.t_end"):
        assert field in joined
    assert len(info.value.violations) == 5


def test_sweep_requires_wi_list():
    with pytest.raises(ValidationError, match="wi_list"):
        parse_config('kind = "sweep"\n')


def test_parse_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_config('kind = "verify"\nseed = = 3\n')
    assert info.value.line == 2 and info.value.column is not None
    assert "line 2" in str(info.value)
    assert isinstance(info.value, ConfigError)


def test_unknown_keys_and_types():
    with pytest.raises(ValidationError) as info:
        parse_config('colour = 1\nseed = "x"\n[model]\nlamda = 2.0\n[wake]\nkappa = true\n')
    joined = "\n".join(info.value.violations)
    assert "colour: unknown key" in joined and "model.lamda: unknown key" in joined
    assert "seed: expected an integer" in joined and "wake.kappa: expected a number" in joined


def test_kind_mismatch():
    with pytest.raises(ValidationError, match="requested"):
        parse_config('kind = "wake"\n', "sweep")
    with pytest.raises(ValidationError):
        parse_config("", "plot")


def test_wake_section():
    cfg = parse_config('kind = "wake"\n[wake]\nkappa = 0.5\nx_end = 8.0\ndx = 0.002\npsi0 = 0.1\n')
    assert cfg.wake.profile.kappa == 0.5 and cfg.wake.profile.x_end == 8.0
    assert cfg.wake.dx == 0.002 and cfg.wake.psi0 == 0.1
    with pytest.raises(ValidationError, match="x_start"):
        parse_config("[wake]\nx_start = 0.5\n")


def test_config_from_dict_and_tolerances():
    cfg = config_from_dict({"tolerances": {"newton_max_iter": 7, "newton_abs_tol": 1e-10}})
    assert cfg.tolerances.newton.max_iter == 7 and cfg.tolerances.newton.abs_tol == 1e-10
    assert isinstance(cfg, ExperimentConfig)


def test_shipped_configs_parse():
    from pathlib import Path

    files = sorted((Path(__file__).parent.parent / "configs").glob("*.toml"))
    assert files
    for f in files:
        parse_config(f.read_text(encoding="utf-8"))
