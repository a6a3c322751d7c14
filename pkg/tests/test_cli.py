import json
import math

import pytest

from crosscavity import parse_state_spec, serialize_state_spec
from crosscavity.cli import main
from crosscavity.io import StateSpecError

NOON2 = {
    "builder": {"name": "noon", "args": [2]},
    "params": {"lambda": 100, "k_delta_r": 0.1},
}


def write_spec(tmp_path, doc, name="state.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_parse_builder_spec():
    parsed = parse_state_spec(json.dumps(NOON2))
    assert parsed.params.lam == 100.0
    assert parsed.params.k_delta_r == 0.1
    assert set(parsed.state.amplitudes) == {(2, 0), (0, 2)}
    assert parsed.atom.c_e == 1.0 + 0j
    assert parsed.norm_correction == pytest.approx(1.0)


def test_parse_explicit_amplitudes():
    doc = {
        "amplitudes": [{"m": 1, "n": 0, "re": 1, "im": 0}],
        "params": {"lambda": 20, "k_delta_r": 0.1},
    }
    parsed = parse_state_spec(json.dumps(doc))
    assert dict(parsed.state.amplitudes) == {(1, 0): 1.0 + 0j}


def test_parse_family_builder():
    doc = {"builder": {"name": "family", "args": [1, 1]}, "params": {"lambda": 20, "k_delta_r": 0.1}}
    parsed = parse_state_spec(json.dumps(doc))
    assert set(parsed.state.amplitudes) == {(1, 3), (3, 1)}


def test_parse_applies_normalization_with_factor():
    doc = {
        "amplitudes": [{"m": 0, "n": 2, "re": 3, "im": 0}, {"m": 2, "n": 0, "re": 4, "im": 0}],
        "params": {"lambda": 20, "k_delta_r": 0.1},
    }
    parsed = parse_state_spec(json.dumps(doc))
    assert parsed.norm_correction == pytest.approx(0.2)
    assert parsed.state.amplitudes[(0, 2)] == pytest.approx(0.6)


def test_parse_rejections():
    bad = [
        ("not json", "invalid JSON"),
        (json.dumps({"params": {"lambda": 1, "k_delta_r": 1}}), "builder"),
        (json.dumps({**NOON2, "extra": 1}), "unknown field"),
        (json.dumps({"builder": {"name": "bogus", "args": [1]}, "params": NOON2["params"]}), "unknown builder"),
        (
            json.dumps(
                {"amplitudes": [{"m": -1, "n": 0, "re": 1, "im": 0}], "params": NOON2["params"]}
            ),
            "non-negative",
        ),
        (
            json.dumps(
                {"amplitudes": [{"m": 0, "n": 0, "re": 0, "im": 0}], "params": NOON2["params"]}
            ),
            "norm",
        ),
        (json.dumps({"builder": NOON2["builder"]}), "params"),
    ]
    for text, fragment in bad:
        with pytest.raises(StateSpecError) as err:
            parse_state_spec(text)
        assert fragment.lower() in str(err.value).lower()


def test_parse_rejects_bad_builder_args():
    params = {"lambda": 20, "k_delta_r": 0.1}
    for builder in (
        {"name": "noon", "args": [True]},
        {"name": "noon", "args": [1.0]},
        {"name": "one_photon", "args": ["x"]},
        {"name": "family", "args": [1]},
    ):
        with pytest.raises(StateSpecError):
            parse_state_spec(json.dumps({"builder": builder, "params": params}))


def test_round_trip_bit_for_bit():
    doc = {
        "amplitudes": [
            {"m": 0, "n": 1, "re": 0.123456789012345, "im": -0.5},
            {"m": 3, "n": 2, "re": -1.1, "im": 0.7071067811865476},
        ],
        "atom": {"c_g": {"re": 0.6, "im": 0.0}, "c_e": {"re": 0.0, "im": 0.8}},
        "params": {"lambda": 37.5, "k_delta_r": 0.17},
    }
    first = parse_state_spec(json.dumps(doc))
    text = serialize_state_spec(first)
    second = parse_state_spec(text)
    assert dict(first.state.amplitudes) == dict(second.state.amplitudes)
    assert first.atom == second.atom
    assert first.params == second.params


def run_cli(args):
    return main([str(a) for a in args])


def test_cli_simulate_and_outputs(tmp_path):
    spec = write_spec(tmp_path, NOON2)
    out = tmp_path / "sim"
    code = run_cli(["simulate", "--state", spec, "--out", out, "--grid", "r:60,phi:48"])
    assert code == 0
    csv_lines = (out / "momentum_grid.csv").read_text().splitlines()
    assert csv_lines[0] == "p_mag,p_ang,density"
    assert len(csv_lines) == 1 + 60 * 48
    meta = json.loads((out / "momentum_grid.json").read_text())
    assert meta["kernel"] == "analytic"
    assert meta["lambda"] == 100
    assert meta["grid"]["radial_points"] == 60
    assert meta["artifact_version"]
    spec_doc = meta["state_spec"]
    assert {(e["m"], e["n"]) for e in spec_doc["amplitudes"]} == {(2, 0), (0, 2)}
    assert spec_doc["params"]["lambda"] == 100


def test_cli_simulate_ring_argmax(tmp_path):
    # the exported grid carries the rotated lobe: angular argmax on the
    # outer ring of a balanced one-photon state sits at pi/4
    spec = write_spec(
        tmp_path,
        {
            "builder": {"name": "one_photon", "args": [math.pi / 4]},
            "params": {"lambda": 20, "k_delta_r": 0.1},
        },
    )
    out = tmp_path / "sim"
    assert run_cli(["simulate", "--state", spec, "--out", out, "--grid", "r:200,phi:720,pmax:40"]) == 0
    ring = math.sqrt(2) * 20.0
    best_row = {}
    with open(out / "momentum_grid.csv") as fh:
        next(fh)
        for line in fh:
            p, ang, dens = (float(x) for x in line.split(","))
            if abs(p - ring) < 0.11:
                best_row[ang] = dens
    assert best_row, "no grid row near the outer ring"
    argmax = max(best_row, key=best_row.get) % math.pi
    assert abs(argmax - math.pi / 4) <= 0.01


def test_cli_detect_noon6(tmp_path):
    spec = write_spec(
        tmp_path,
        {"builder": {"name": "noon", "args": [6]}, "params": {"lambda": 20, "k_delta_r": 0.1}},
    )
    out = tmp_path / "det"
    assert run_cli(["detect", "--state", spec, "--out", out]) == 0
    report = json.loads((out / "detection.json").read_text())
    assert report["predicted_missing"] == 4
    flagged = [f["n"] for f in report["missing_rings"] if f["flagged"]]
    assert flagged == [4]


def test_cli_detect_one_photon(tmp_path):
    spec = write_spec(
        tmp_path,
        {
            "builder": {"name": "one_photon", "args": [math.pi / 8]},
            "params": {"lambda": 20, "k_delta_r": 0.1},
        },
    )
    out = tmp_path / "det"
    assert run_cli(["detect", "--state", spec, "--out", out]) == 0
    report = json.loads((out / "detection.json").read_text())
    assert abs(report["concurrence"] - math.sqrt(2) / 2) <= 0.02


def test_cli_populations(tmp_path):
    spec = write_spec(tmp_path, NOON2)
    out = tmp_path / "pop"
    assert run_cli(["populations", "--state", spec, "--out", out, "--estimator", "exact"]) == 0
    rows = (out / "populations.csv").read_text().splitlines()
    assert rows[0] == "n,p,estimator"
    values = {int(r.split(",")[0]): float(r.split(",")[1]) for r in rows[1:]}
    assert values[2] == pytest.approx(0.0, abs=1e-10)


def test_cli_coeffs(tmp_path):
    out = tmp_path / "c"
    assert run_cli(["coeffs", "--total", 1, "--theta", 0.0, "--out", out]) == 0
    rows = (out / "coeffs.csv").read_text().splitlines()
    assert rows == ["1,0", "0,1"]
    assert run_cli(["coeffs", "--total", 99, "--theta", 0.0, "--out", out]) == 4


def test_cli_separable_two_photon_detect(tmp_path):
    spec = write_spec(
        tmp_path,
        {
            "amplitudes": [{"m": 1, "n": 1, "re": 1, "im": 0}],
            "params": {"lambda": 20, "k_delta_r": 0.1},
        },
    )
    out = tmp_path / "det11"
    assert run_cli(["detect", "--state", spec, "--out", out]) == 0
    report = json.loads((out / "detection.json").read_text())
    assert report["theta_m"] is None
    assert not [f for f in report["missing_rings"] if f["flagged"]]


def test_cli_sweep_two_photon(tmp_path):
    spec = write_spec(
        tmp_path,
        {
            "builder": {"name": "two_photon", "args": [0.0]},
            "params": {"lambda": 20, "k_delta_r": 0.1},
        },
    )
    out = tmp_path / "sweep"
    assert run_cli(["sweep", "--state", spec, "--sweep", f"0:{math.pi/4}:9", "--out", out]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("alpha,theta_m,concurrence,P1")
    p2 = [float(r.split(",")[4]) for r in rows[1:]]
    assert p2[0] == pytest.approx(0.25, abs=1e-9)
    assert p2[-1] == pytest.approx(0.0, abs=1e-9)
    assert all(b < a for a, b in zip(p2, p2[1:]))


def test_cli_sweep_one_photon_readout_columns(tmp_path):
    spec = write_spec(
        tmp_path,
        {
            "builder": {"name": "one_photon", "args": [0.0]},
            "params": {"lambda": 20, "k_delta_r": 0.1},
        },
    )
    out = tmp_path / "sweep1"
    assert run_cli(["sweep", "--state", spec, "--sweep", f"0:{math.pi/2}:17", "--out", out]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()[1:]
    thetas = []
    for row in rows:
        alpha, theta, conc, p1, p2 = (float(x) for x in row.split(","))
        thetas.append(theta)
        assert abs(theta - alpha) <= 0.01
        assert abs(conc - abs(math.sin(2 * alpha))) <= 0.02
        assert abs(p1 - 0.5) <= 1e-9 and abs(p2 - 0.5) <= 1e-9
    assert all(b >= a for a, b in zip(thetas, thetas[1:]))  # monotone readout


def test_cli_sweep_requires_swept_builder(tmp_path):
    spec = write_spec(tmp_path, NOON2)
    assert run_cli(["sweep", "--state", spec, "--sweep", "0:1:5", "--out", tmp_path / "x"]) == 4


def test_cli_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert run_cli(["detect", "--state", bad, "--out", tmp_path / "o"]) == 2
    missing = tmp_path / "missing.json"
    assert run_cli(["detect", "--state", missing, "--out", tmp_path / "o"]) == 2


def test_cli_validate_small():
    assert run_cli(["validate"]) == 0
