import csv

import numpy as np
import pytest

from chemotax.harness import (
    REFERENCE_SWEEP,
    ConfigError,
    RunConfig,
    SweepRow,
    SweepSpec,
    default_parallelism,
    initial_state,
    parse_config,
    parse_config_text,
    parse_sweep_text,
    preset_initial,
    run_sweep,
    simulate,
    write_sweep_csv,
)
from chemotax.mesh import generate_disk_mesh
from chemotax.simulator import Outcome


@pytest.fixture(scope="module")
def mesh():
    return generate_disk_mesh(9.0, 6)


def test_minimal_config_takes_defaults(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("tau=0 k=1.1 l=1.2 alpha=1 gamma0=1 gamma1=1\n")
    cfg = parse_config(path)
    assert (cfg.tau, cfg.k, cfg.l, cfg.alpha, cfg.gamma0, cfg.gamma1) == (0, 1.1, 1.2, 1, 1, 1)
    assert (cfg.radius, cfg.n_rings, cfg.dt, cfg.t_end, cfg.blowup_threshold) == (9, 40, 1e-5, 0.1, 1e4)
    assert (cfg.chi, cfg.xi, cfg.beta, cfg.delta) == (1, 1, 1, 1)


def test_comments_and_blank_lines():
    cfg = parse_config_text("# header\n\nk=0.5   # trailing\n  l=0.7\n")
    assert (cfg.k, cfg.l) == (0.5, 0.7)


@pytest.mark.parametrize("text,needle", [
    ("k=1\ndt=-1\n", "line 2"),
    ("k=1\ndt=-1\n", "dt"),
    ("speed=3\n", "speed"),
    ("k=abc\n", "k"),
    ("n_rings=2.5\n", "n_rings"),
    ("k\n", "key=value"),
    ("tau=2\n", "tau"),
    ("u0=triangle\n", "u0"),
    ("u0_amp=-1\n", "u0_amp"),
])
def test_config_errors_name_the_key(text, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config_text(text)


def test_config_round_trip():
    cfg = RunConfig(tau=0, k=1.1, l=0.9, alpha=1.0, gamma0=1.0, dt=1e-5, n_rings=60)
    assert parse_config_text(cfg.to_text()) == cfg
    cfg1 = RunConfig(tau=1, k=1.0, l=0.8, alpha=0.8, gamma1=1.3, v0_amp=5.0)
    assert parse_config_text(cfg1.to_text()) == cfg1


def test_presets(mesh):
    origin = int(np.argmin(np.hypot(*mesh.vertices.T)))
    assert preset_initial("gaussian_bell_u", 15, mesh).values[origin] == pytest.approx(1215)
    assert preset_initial("gaussian_v", 5, mesh).values[origin] == pytest.approx(5)
    np.testing.assert_array_equal(preset_initial("constant", 2.5, mesh).values, 2.5)
    with pytest.raises(ConfigError):
        preset_initial("hat", 1, mesh)


def test_initial_state_signals_only_for_tau1(mesh):
    st0 = initial_state(RunConfig(tau=0), mesh)
    assert st0.v is None and st0.w is None
    st1 = initial_state(RunConfig(tau=1, k=0.5, l=0.5, v0_amp=5), mesh)
    assert st1.v.values.max() == pytest.approx(5)
    assert st1.w.values.max() == pytest.approx(1)


def test_empty_sweep_is_rejected():
    with pytest.raises(ConfigError):
        parse_sweep_text("k=1\n")
    with pytest.raises(ConfigError):
        SweepSpec(RunConfig(), ())


def test_bad_sweep_row_names_line():
    with pytest.raises(ConfigError, match="line 3"):
        parse_sweep_text("k=1\nrow l=1\nrow dt=0\n")


def test_reference_sweep_spec():
    spec = parse_sweep_text(REFERENCE_SWEEP)
    cfgs = spec.configs()
    assert len(cfgs) == 7
    assert [c.tau for c in cfgs] == [0, 0, 0, 1, 1, 1, 1]
    assert [(c.k, c.l) for c in cfgs] == [
        (0.5, 0.5), (1.2, 1.0), (0.8, 0.6), (1.0, 0.8), (0.5, 0.5), (1.0, 0.8), (0.8, 0.8)]
    th = [round(c.params().theta0, 12) for c in cfgs]
    assert th == [0.36, -0.2, -0.64, -0.2, 0.52, -0.2, -0.58]
    assert cfgs[3].v0_amp == 1 and cfgs[5].v0_amp == 5 and cfgs[6].v0_amp == 5
    assert parse_sweep_text(spec.to_text()) == spec


def test_simulate_small_config(mesh):
    cfg = RunConfig(n_rings=6, dt=1e-4, t_end=1e-3, record_every=2)
    res = simulate(cfg, mesh)
    assert res.outcome is Outcome.REACHED_T_END
    assert res.final_state.step == 10
    assert [r.step for r in res.rows] == [0, 2, 4, 6, 8, 10]


def test_sweep_row_labels():
    common = dict(index=1, u0="", v0="", w0="", tau=0, k=1, l=1, theta0=0,
                  verdict="NoGuarantee", matched_condition="")
    assert SweepRow(outcome="SteadyState", t_max=None, **common).t_max_label == "+inf"
    assert SweepRow(outcome="ReachedTEnd", t_max=None, **common).t_max_label == "+inf"
    assert SweepRow(outcome="BlowUp", t_max=0.00035, **common).t_max_label == "0.00035"
    bad = SweepRow(outcome="BlowUp", t_max=0.01, **{**common, "verdict": "BoundedGuaranteed"})
    assert bad.contradicts_theory


def test_run_sweep_small(tmp_path, monkeypatch):
    monkeypatch.setenv("CHEMOTAX_THREADS", "2")
    text = ("n_rings=6\ndt=1e-5\nt_end=0.002\nrecord_every=50\n"
            "row tau=0 k=1.1 l=0.9\n"
            "row tau=0 k=0.5 l=0.7\n"
            "row tau=1 k=0.4 l=0.4 v0_amp=5\n")
    report = run_sweep(parse_sweep_text(text), parallelism=2)
    assert [r.index for r in report.rows] == [1, 2, 3]
    assert report.rows[0].outcome == "BlowUp"
    assert report.rows[1].outcome == "ReachedTEnd"
    assert report.rows[2].verdict == "BoundedGuaranteed"
    assert not report.contradictions
    out = tmp_path / "s.csv"
    write_sweep_csv(report, out)
    rows = list(csv.DictReader(open(out)))
    assert rows[0]["t_max"] != "+inf" and rows[1]["t_max"] == "+inf"
    assert rows[2]["v0"] == "5*exp(-r^2)"
    # serial and parallel agree
    serial = run_sweep(parse_sweep_text(text), parallelism=1)
    assert serial.rows == report.rows


def test_parallelism_cap(monkeypatch):
    monkeypatch.setenv("CHEMOTAX_THREADS", "1")
    assert default_parallelism() == 1
    monkeypatch.setenv("CHEMOTAX_THREADS", "many")
    with pytest.raises(ConfigError):
        default_parallelism()
