import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from wmh2.cli import EXIT_BREACH, EXIT_CONFIG, EXIT_PASS, main
from wmh2.config import ConfigError, RunConfig, parse_config


@settings(max_examples=30, deadline=None)
@given(st.floats(0.001, 0.03), st.floats(0.001, 1.0), st.integers(0, 10 ** 6), st.booleans(),
       st.lists(st.integers(-5, 5), max_size=4).map(tuple))
def test_round_trip(dt, eps, seed, dealias, ds):
    cfg = RunConfig(dt=dt, epsilon=eps, seed=seed, dealias=dealias, scan_ds=ds)
    assert parse_config(cfg.to_text()) == cfg


def test_comments_and_defaults():
    cfg = parse_config("# pinned\nn = 32  # smaller box\n\n")
    assert cfg.n == 32 and cfg.sigma == 0.1


@pytest.mark.parametrize("text", ["nope = 1", "n = 12", "dt = 1.0", "n 32", "sigma = -1", "dealias = maybe"])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_horizon_capped():
    cfg = RunConfig(T=5.0)
    assert cfg.horizon() == pytest.approx(16.0 / 4 - 3.0)


def test_cli_config_error(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("dt = 5\n")
    assert main(["verify", "--config", str(p)]) == EXIT_CONFIG
    assert main(["verify", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG


def _cfg(tmp_path, **kw):
    base = dict(verify_n=16, verify_t_samples=16, seeds=1, n=16, dt=0.02, stride=2, T=0.2,
                out=str(tmp_path / "out"))
    base.update(kw)
    # a 16^3 box of side 16 cannot hold the default bump; shrink it
    base.setdefault("bump_radius", 2.0)
    base.setdefault("bump_offset_scale", 0.5)
    p = tmp_path / "c.cfg"
    RunConfig(**base).write(p)
    return p


def test_cli_verify_and_negative_control(tmp_path, capsys):
    assert main(["verify", "--config", str(_cfg(tmp_path))]) == EXIT_PASS
    assert main(["verify", "--config", str(_cfg(tmp_path, flip_signature=True))]) == EXIT_BREACH
    lines = (tmp_path / "out" / "manifest.jsonl").read_text().splitlines()
    first, second = (json.loads(x) for x in lines)
    assert first["pass"] and not second["pass"]
    assert first["signature"] != second["signature"]
    assert "full_nullform_identity" in capsys.readouterr().out


def test_cli_zero_amplitude_run(tmp_path):
    p = _cfg(tmp_path, epsilon=0.0)
    assert main(["simulate", "--config", str(p)]) == EXIT_PASS
    assert main(["analyze", "--config", str(p)]) == EXIT_PASS
    out = tmp_path / "out"
    rows = (out / "simulate" / "diagnostics.csv").read_text().splitlines()[1:]
    assert all(float(r.split(",")[1]) == 0 for r in rows)
    env = (out / "analyze" / "envelopes.csv").read_text().splitlines()[1:]
    assert all(float(r.split(",")[3]) == 0 for r in env)


def test_analysis_bit_identical(tmp_path):
    p = _cfg(tmp_path, epsilon=0.01)
    main(["simulate", "--config", str(p), "--seed", "3"])
    main(["analyze", "--config", str(p)])
    out = tmp_path / "out" / "analyze"
    first = {f.name: f.read_bytes() for f in out.glob("*.csv")}
    main(["analyze", "--config", str(p)])
    assert first == {f.name: f.read_bytes() for f in out.glob("*.csv")}
