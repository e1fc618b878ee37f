import json

import numpy as np
import pytest

from toricdyn import (
    ConfigError,
    EchoSeries,
    SweepConfig,
    derivative_scan,
    echo_zero_spacings,
    locate_peak,
    run_closed_sweep,
    run_open_sweep,
    second_difference,
    write_outputs,
)


def test_derivative_scan():
    x = np.arange(0, 1.0001, 0.1)
    assert np.allclose(derivative_scan(2 * x, 0.1), 2.0)
    assert np.allclose(derivative_scan(np.full(11, 3.0), 0.1), 0.0)
    # central differences are exact for quadratics
    assert np.allclose(derivative_scan(x**2, 0.1), 2 * x[1:-1], atol=1e-12)
    with pytest.raises(ConfigError):
        derivative_scan(np.array([1.0, 2.0]), 0.1)


def test_second_difference():
    x = np.arange(0, 1.0001, 0.1)
    assert np.allclose(second_difference(x**2, 0.1), 2.0, atol=1e-9)
    with pytest.raises(ConfigError):
        second_difference(np.array([1.0, 2.0]), 0.1)


def test_locate_peak():
    betas = np.array([0.1, 0.2, 0.3, 0.4])
    assert locate_peak(np.array([1.0, -5.0, 2.0, 1.0]), betas) == 0.2
    # ties resolve toward smaller beta
    assert locate_peak(np.array([1.0, 3.0, 3.0, 1.0]), betas) == 0.2
    with pytest.warns(UserWarning, match="boundary"):
        assert locate_peak(np.array([4.0, 3.0, 2.0, 1.0]), betas) == 0.1
    with pytest.raises(ConfigError):
        locate_peak(np.array([]), np.array([]))


def test_echo_zero_spacings_synthetic():
    t = np.arange(0, 10.0001, 0.01)
    # interior dips below threshold at t = 2, 4, 6, 8 -> three spacings
    echo = np.clip(np.abs(np.sin(np.pi * t / 2)) ** 6, 0, 1)
    series = EchoSeries(times=t, echo=echo, rate=np.zeros_like(t))
    spacings = echo_zero_spacings(series, threshold=1e-4)
    assert len(spacings) == 3
    assert np.allclose(spacings, 2.0, atol=0.05)
    flat = EchoSeries(times=t, echo=np.ones_like(t), rate=np.zeros_like(t))
    assert len(echo_zero_spacings(flat)) == 0
    with pytest.raises(ConfigError):
        echo_zero_spacings(series, threshold=0.0)


def test_config_validation():
    with pytest.raises(ConfigError):
        SweepConfig(pipeline="bogus")
    with pytest.raises(ConfigError):
        SweepConfig(beta0_step=-0.1)
    with pytest.raises(ConfigError):
        SweepConfig(t_final=0.0)  # empty time grid
    with pytest.raises(ConfigError):
        SweepConfig(workers=0)
    grid = SweepConfig(beta0_min=0.1, beta0_max=0.3, beta0_step=0.1).beta_grid()
    assert np.allclose(grid, [0.1, 0.2, 0.3])


def test_config_from_json(tmp_path):
    raw = {
        "lattice": {"lx": 2, "ly": 3},
        "beta0": {"min": 0.1, "max": 0.5, "step": 0.2},
        "time": {"ti": 0.0, "tf": 2.0, "dt": 0.1},
        "pipeline": "closed",
        "bath": {"k": 0.02, "ratio": 5.0},
        "output": "out.csv",
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    cfg = SweepConfig.from_json(path)
    assert (cfg.lx, cfg.ly) == (2, 3)
    assert cfg.beta0_max == 0.5 and cfg.dt == 0.1
    assert cfg.bath_k == 0.02 and cfg.bath_ratio == 5.0
    assert cfg.output == "out.csv"
    with pytest.raises(ConfigError):
        SweepConfig.from_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        SweepConfig.from_json(bad)


@pytest.fixture(scope="module")
def tiny_sweep_result():
    cfg = SweepConfig(lx=2, ly=2, beta0_min=0.05, beta0_max=0.15, beta0_step=0.05,
                      t_final=10.0, dt=0.01, dump_series=True)
    return cfg, run_closed_sweep(cfg)


def test_closed_sweep_small_values(tiny_sweep_result):
    _, res = tiny_sweep_result
    assert len(res.betas) == 3
    i = 0  # beta0 = 0.05
    assert 0.45 < res.avg_ggm[i] <= 0.5
    assert res.min_echo[i] > 0.9  # same topological phase, echo stays high
    assert res.d_avg_ggm is not None and len(res.d_avg_ggm) == 1
    assert not res.failures


def test_closed_sweep_magnetized_limit_matches_analytic():
    # independent closed form: from the near-delta initial state the site
    # probabilities are p(t) = 1 - (1 - cos 4t)/4 on every lattice, so the
    # entanglement signal averages to the grid mean of (1 - cos 4t)/4
    cfg = SweepConfig(lx=2, ly=2, beta0_min=30.0, beta0_max=30.0, beta0_step=0.01)
    res = run_closed_sweep(cfg)
    t = cfg.time_grid()
    expected = np.mean((1 - np.cos(4 * t)) / 4)
    assert abs(res.avg_ggm[0] - expected) < 1e-6
    assert res.d_avg_ggm is None  # single point, no derivatives


def test_sweep_determinism_and_outputs(tmp_path, tiny_sweep_result):
    cfg, res = tiny_sweep_result
    cfg_a = SweepConfig(**{**cfg.__dict__, "output": str(tmp_path / "a.csv")})
    cfg_b = SweepConfig(**{**cfg.__dict__, "output": str(tmp_path / "b.csv")})
    write_outputs(run_closed_sweep(cfg_a), cfg_a)
    write_outputs(run_closed_sweep(cfg_b), cfg_b)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    lines = (tmp_path / "a.csv").read_text().strip().split("\n")
    assert lines[0] == "beta0,avg_ggm,avg_ln,min_echo,d_avg_ggm,d_avg_ln"
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[4] == "nan" and first[5] == "nan"  # endpoint derivatives
    meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
    assert meta["config"]["lx"] == 2
    assert "beta_star_ln" in meta and "zero_spacings" in meta
    series_files = sorted(tmp_path.glob("series_*.csv"))
    assert len(series_files) == 3
    header = series_files[0].read_text().split("\n", 1)[0]
    assert header == "t,echo,rate,ggm,ln"


def test_workers_do_not_change_results(tiny_sweep_result):
    cfg, res = tiny_sweep_result
    cfg2 = SweepConfig(**{**cfg.__dict__, "workers": 2, "dump_series": False})
    res2 = run_closed_sweep(cfg2)
    assert np.array_equal(res.betas, res2.betas)
    assert np.array_equal(res.avg_ggm, res2.avg_ggm)
    assert np.array_equal(res.avg_ln, res2.avg_ln)


def test_open_sweep_smoke(tmp_path):
    cfg = SweepConfig(lx=2, ly=2, beta0_min=0.2, beta0_max=0.4, beta0_step=0.2,
                      t_final=0.2, dt=0.1, pipeline="open", bath_k=0.05,
                      output=str(tmp_path / "open.csv"))
    res = run_open_sweep(cfg)
    assert len(res.betas) == 2
    assert np.all(np.isnan(res.avg_ggm)) and np.all(np.isnan(res.min_echo))
    assert np.all(np.isfinite(res.avg_ln))
    assert res.metadata["max_trace_drift"] < 1e-8
    write_outputs(res, cfg)
    assert (tmp_path / "open.csv").exists()


def test_pipeline_mismatch():
    with pytest.raises(ConfigError):
        run_closed_sweep(SweepConfig(pipeline="open", t_final=0.2, dt=0.1, lx=2, ly=2))
    with pytest.raises(ConfigError):
        run_open_sweep(SweepConfig(pipeline="closed", lx=2, ly=2))
