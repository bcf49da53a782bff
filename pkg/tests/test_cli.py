import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from rodeo.cli import COLUMNS, main
from rodeo.config import parse_config
from rodeo.errors import SchemaError
from rodeo.exact import propagator_choi
from rodeo.model import p_divisibility_sampled, pauli_rates


def run_cli(tmp_path, cfg, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    code = main(["--config", str(path), "--out", str(out), *extra])
    summary = json.loads((out / "summary.json").read_text())
    return code, out, summary


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_defaults():
    cfg = parse_config('{"model": {"preset": "dephasing"}}')
    assert cfg.mode == "exact"
    assert cfg.dt == 1e-3
    assert cfg.seed == 0


def test_negative_dt():
    with pytest.raises(SchemaError) as info:
        parse_config('{"model": {"preset": "dephasing"}, "dt": -0.1}')
    assert [p for p, _ in info.value.errors] == ["dt"]


def test_all_errors_reported():
    text = json.dumps({
        "model": {"preset": "nope"},
        "dt": 0,
        "seed": -1,
        "colour": "red",
        "strategy": {"type": "zero", "extra": 1},
    })
    with pytest.raises(SchemaError) as info:
        parse_config(text)
    paths = {p for p, _ in info.value.errors}
    assert {"model/preset", "dt", "seed", "", "strategy"} <= paths


@pytest.mark.parametrize(
    "model, where",
    [
        ({"dim": 2, "channels": [{"rate": 1.0, "operator": [[0, 1, 0], [1, 0, 0]]}]}, "model/channels/0"),
        ({"gx": 1.0}, "model"),
        ({"preset": "pauli", "dim": 2}, "model"),
        ({"dim": 3}, "model/dim"),
    ],
)
def test_semantic_errors(model, where):
    with pytest.raises(SchemaError) as info:
        parse_config(json.dumps({"model": model}))
    assert where in [p for p, _ in info.value.errors]


def test_whole_steps_required():
    with pytest.raises(SchemaError):
        parse_config('{"model": {"preset": "dephasing"}, "dt": 0.3, "t_max": 1.0}')


def test_demo_preset_expansion():
    me = parse_config('{"model": {"preset": "pauli_nonPdiv_demo"}}').build_model()
    for t in (0.0, 0.7, 2.3):
        gx, gy, gz = pauli_rates(me, t)
        assert (gx, gy) == (0.3, 0.3)
        assert gz == pytest.approx(0.5 * np.cos(2 * t))
        beta = me.hamiltonian_at(t)[0, 0].real
        assert beta == pytest.approx(1 + 0.5 * np.sin(t))


def test_demo_preset_is_cp_but_not_p_divisible():
    me = parse_config('{"model": {"preset": "pauli_nonPdiv_demo"}}').build_model()
    choi = propagator_choi(me, 5.0, 1e-3, 10)
    assert choi.min_eigenvalue.min() >= -1e-10
    rng = np.random.default_rng(0)
    flags = [p_divisibility_sampled(me, t, 5, rng)[0] for t in np.linspace(0, 5, 51)]
    assert not all(flags)


def test_preset_overrides_and_inline_model():
    cfg = parse_config('{"model": {"preset": "pauli", "gx": 0.2, "gz": {"family": "constant", "c": 0.4}}}')
    assert pauli_rates(cfg.build_model(), 0.0) == (0.2, 0.0, 0.4)
    inline = {
        "dim": 2,
        "hamiltonian": [{"coefficient": 0.5, "matrix": "sigma_z"}],
        "channels": [{"rate": 1.0, "operator": [[0, [0, 1]], [0, 0]]}],
    }
    me = parse_config(json.dumps({"model": inline})).build_model()
    np.testing.assert_allclose(me.operators[0], [[0, 1j], [0, 0]])


def test_exact_mode_dephasing(tmp_path):
    code, out, summary = run_cli(tmp_path, {"model": {"preset": "dephasing"}, "t_max": 1.0})
    assert code == 0
    rows = read_rows(out / "trajectory.csv")
    assert list(rows[0]) == COLUMNS
    last = rows[-1]
    assert float(last["t"]) == 1.0
    assert abs(float(last["x_exact"]) - np.exp(-2)) < 1e-6
    assert last["x_mc"] == ""
    ET.parse(out / "bloch.svg")
    assert summary["error"] is None


def test_jump_mode_negative_rate(tmp_path, capsys):
    cfg = {"mode": "jump", "model": {"preset": "unphysical_dephasing"}, "t_max": 0.1, "n_traj": 10}
    code, _, summary = run_cli(tmp_path, cfg)
    assert code == 3
    assert summary["error"]["kind"] == "NegativeRate"
    assert summary["error"]["time"] == 0.0
    assert "t=0" in capsys.readouterr().err


def test_witness_mode(tmp_path):
    cfg = {"mode": "witness", "model": {"preset": "unphysical_dephasing"}, "t_max": 0.5, "n_traj": 500}
    code, out, summary = run_cli(tmp_path, cfg)
    assert code == 0
    ev = summary["breakdown"]
    assert ev["time"] <= 2 * 1e-3
    assert ev["oracle"]["confirmed"]
    assert ev["oracle"]["first_violation_time"] <= 2 * 1e-3
    rows = read_rows(out / "trajectory.csv")
    assert rows[-1]["breakdown_flag"] == "1"


def test_nmqj_mode_breakdown_exit(tmp_path):
    cfg = {"mode": "nmqj", "model": {"preset": "unphysical_dephasing"}, "t_max": 0.1, "n_traj": 500}
    code, _, summary = run_cli(tmp_path, cfg)
    assert code == 4
    assert summary["error"]["kind"] == "Breakdown"
    assert summary["breakdown"] is not None


def test_nmqj_mode_demo(tmp_path):
    cfg = {
        "mode": "nmqj", "model": {"preset": "pauli_nonPdiv_demo"}, "strategy": {"type": "target_basis"},
        "t_max": 3.0, "n_traj": 2000, "record_every": 50,
    }
    code, out, summary = run_cli(tmp_path, cfg)
    assert code == 0
    assert summary["reverse_jumps"] > 0
    assert summary["compare"]["passed"]
    pops = read_rows(out / "populations.csv")
    assert {r["class_id"] for r in pops} <= {"0", "1", "2"}
    rows = read_rows(out / "trajectory.csv")
    assert int(rows[-1]["reverse_jumps_cum"]) == summary["reverse_jumps"]


def test_schema_failure_writes_summary(tmp_path):
    code, _, summary = run_cli(tmp_path, {"model": {"preset": "dephasing"}, "dt": -1})
    assert code == 2
    assert summary["error"]["kind"] == "SchemaError"
    assert summary["error"]["errors"][0]["path"] == "dt"


def test_bad_policy_env(tmp_path, monkeypatch):
    monkeypatch.setenv("RODEO_NUMERIC_POLICY", "sloppy")
    code, _, summary = run_cli(tmp_path, {"model": {"preset": "dephasing"}})
    assert code == 2


def test_strict_policy_env(tmp_path, monkeypatch):
    monkeypatch.setenv("RODEO_NUMERIC_POLICY", "strict")
    code, _, summary = run_cli(tmp_path, {"model": {"preset": "dephasing"}, "t_max": 0.2})
    assert code == 0
    assert summary["numeric_policy"] == "strict"


def test_repeatable_csv(tmp_path):
    cfg = {"mode": "jump", "model": {"preset": "pauli_uniform"}, "t_max": 0.5, "n_traj": 200, "seed": 3}
    for sub in ("a", "b"):
        (tmp_path / sub).mkdir()
    _, out_a, _ = run_cli(tmp_path / "a", cfg)
    _, out_b, _ = run_cli(tmp_path / "b", cfg)
    assert (out_a / "trajectory.csv").read_bytes() == (out_b / "trajectory.csv").read_bytes()
    _, out_c, _ = run_cli(tmp_path / "b", cfg, "--seed", "4")
    assert (out_a / "trajectory.csv").read_bytes() != (out_c / "trajectory.csv").read_bytes()


def test_compare_mode(tmp_path):
    cfg = {
        "mode": "compare", "model": {"preset": "pauli_uniform"}, "strategy": {"type": "target_basis"},
        "t_max": 1.0, "n_traj": 1000, "record_every": 50,
    }
    code, _, summary = run_cli(tmp_path, cfg)
    assert code == 0
    assert summary["compare"]["passed"]
    assert summary["compare_jump"]["passed"]
