import json
import math

import pytest

from multitime_rd.cli import main

SQRT2 = math.sqrt(2.0)


def run(tmp_path, config, *extra, name="cfg.json"):
    path = tmp_path / name
    path.write_text(config if isinstance(config, str) else json.dumps(config))
    out = tmp_path / "out"
    status = main(["--config", str(path), "--out", str(out), "--quiet", *extra])
    report = out / "report.json"
    return status, (json.loads(report.read_text()) if report.exists() else None), out


def test_catalog_list(capsys, tmp_path):
    assert main(["catalog-list", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    for entry in ("rational_family", "exp_family", "rational_m1", "exp_m1", "tanh_front",
                  "coth_branch"):
        assert entry in text
    doc = json.loads((tmp_path / "report.json").read_text())
    assert len(doc["entries"]) == 6


def test_verify_front_passes(tmp_path):
    status, doc, out = run(tmp_path, {"command": "verify", "solution": {"catalog": "tanh_front"}})
    assert status == 0 and doc["pass"]
    assert float(doc["reports"][0]["max_abs_residual"]) <= 1e-8
    assert (out / "residual.csv").exists()


def test_verify_non_solution_fails(tmp_path):
    status, doc, _ = run(tmp_path, {"command": "verify", "solution": {"expression": "tau1"}})
    assert status == 1 and not doc["pass"]
    rep = doc["reports"][0]
    assert rep["max_abs_residual"] == pytest.approx(1.0)
    assert rep["worst_point"][0] == 0.0


def test_yaml_config_and_random_points(tmp_path):
    cfg = "command: verify\nsolution:\n  catalog: exp_m1\n  params: {C: 2.0}\nrandom_points: 30\n"
    status, doc, _ = run(tmp_path, cfg, "--seed", "4", name="cfg.yaml")
    assert status == 0
    assert [r["label"] for r in doc["reports"]] == ["grid", "random points"]


def test_report_is_byte_identical(tmp_path):
    cfg = {"command": "verify", "solution": {"catalog": "rational_family", "params": {"m": 2}},
           "random_points": 20}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    outs = []
    for name in ("a", "b"):
        assert main(["--config", str(tmp_path / "c.json"), "--out", str(tmp_path / name),
                     "--seed", "9", "--quiet"]) == 0
        outs.append((tmp_path / name / "report.json").read_bytes())
    assert outs[0] == outs[1]
    assert b"e+00" in outs[0] or b"e-" in outs[0]


def test_float_format(tmp_path):
    _, doc, out = run(tmp_path, {"command": "verify", "solution": {"catalog": "tanh_front"}})
    text = (out / "report.json").read_text()
    assert '"tolerance": 1.0000000000000000e-08' in text


def test_malformed_json_reports_position(tmp_path, capsys):
    status, doc, _ = run(tmp_path, '{"command": "verify",\n "solution": {"catalog": "x"\n}')
    assert status == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config_error" and "cfg.json:3:" in err["message"]


@pytest.mark.parametrize("cfg", [
    {"command": "verify", "solution": {"catalog": "no_such_entry"}},
    {"command": "verify", "solution": {"catalog": "tanh_front"},
     "grid": {"ranges": [[0, 1]], "counts": [4]}},
    {"command": "verify", "solution": {"catalog": "tanh_front"},
     "grid": {"ranges": [[1, 0], [0, 1]], "counts": [4, 4]}},
    {"command": "verify"},
    {"command": "explode"},
    {"command": "verify", "solution": {"expression": "tau1 + y"}},
    {"command": "verify", "solution": {"catalog": "tanh_front", "params": {"C": -1}}},
])
def test_config_errors_exit_2(tmp_path, cfg):
    status, doc, _ = run(tmp_path, cfg)
    assert status == 2
    assert doc["error"] in ("config_error", "bad_range", "bad_parameter")


def test_missing_config_file(tmp_path):
    assert main(["verify", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path),
                 "--quiet"]) == 2


def test_numeric_error_exit_3(tmp_path):
    cfg = {"command": "simulate", "solution": {"catalog": "tanh_front"},
           "simulate": {"x_range": [-10, 10], "s_range": [0, 1], "dx": 0.05, "ds": 0.01}}
    status, doc, _ = run(tmp_path, cfg)
    assert status == 3 and doc["error"] == "stability_violation"


def test_simulate_writes_csv(tmp_path):
    cfg = {"command": "simulate", "solution": {"catalog": "tanh_front"},
           "simulate": {"x_range": [-10, 10], "s_range": [0, 2], "dx": 0.1, "level": 0.5,
                        "expected_speed": SQRT2 / 2}}
    status, doc, out = run(tmp_path, cfg)
    assert status == 0 and doc["linf_error"] <= 5e-3
    header = (out / "simulation.csv").read_text().splitlines()[0]
    assert header == "s,x,u,u_exact,error"


def test_transform_characteristic(tmp_path):
    cfg = {"command": "transform", "grid": {"ranges": [[0, 1], [0, 1]], "counts": [20, 20]},
           "tolerance": 1e-10,
           "transform": {"characteristic": {"h1": "1", "h2": "t1",
                                            "first_integral": "t2 - t1**2/2",
                                            "W1": "0", "W2": "s",
                                            "domain": [[0, 1], [0, 1]]}}}
    status, doc, _ = run(tmp_path, cfg)
    assert status == 0


def test_transform_degenerate_exit_3(tmp_path):
    cfg = {"command": "transform",
           "transform": {"characteristic": {"h1": "1", "h2": "t1",
                                            "first_integral": "t2 - t1**2/2",
                                            "W1": "s", "W2": "s",
                                            "domain": [[0, 1], [0, 1]]}}}
    status, doc, _ = run(tmp_path, cfg)
    assert status == 3 and doc["error"] == "degenerate_transform"


def test_transform_chain(tmp_path):
    cfg = {"command": "transform",
           "pde": {"m": 1, "h": ["t1"], "mu": 3,
                   "reaction": {"kind": "cubic", "params": {"a": 5, "b": -2}}},
           "solution": {"catalog": "tanh_front"},
           "transform": {"chain": [{"kind": "log"}, {"kind": "scaling", "mu": 3, "a": 5, "b": -2}]},
           "grid": {"ranges": [[1, 3], [-5, 5]], "counts": [20, 40]}}
    status, doc, _ = run(tmp_path, cfg)
    assert status == 0, doc


def test_profile_shoot(tmp_path):
    cfg = {"command": "profile", "profile": {"mode": "shoot", "u_minus": 1, "u_plus": 0,
                                             "bracket": [0.3, 1.0], "expected_speed": SQRT2 / 2}}
    status, doc, out = run(tmp_path, cfg)
    assert status == 0 and abs(doc["speed"] - SQRT2 / 2) < 1e-3
    assert (out / "profile.csv").read_text().startswith("y,u\n")


def test_profile_integrate_against_exact(tmp_path):
    cfg = {"command": "profile",
           "profile": {"mode": "integrate", "k": -SQRT2, "u0": SQRT2, "du0": -SQRT2,
                       "y_range": [1, 5], "step": 1e-3, "exact": "sqrt(2)/y"}}
    status, doc, _ = run(tmp_path, cfg)
    assert status == 0 and doc["max_error_vs_exact"] < 1e-6


def test_text_summary(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"command": "verify",
                                                 "solution": {"catalog": "tanh_front"}}))
    main(["--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "o")])
    text = capsys.readouterr().out
    assert text.startswith("command: verify   pass: yes")
    assert "max|res|" in text


def test_malformed_value_is_config_error(tmp_path):
    status, doc, _ = run(tmp_path, {"command": "verify",
                                    "solution": {"expression": "x", "m": "two"}})
    assert status == 2 and doc["error"] == "config_error"
