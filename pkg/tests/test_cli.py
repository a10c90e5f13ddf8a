import csv
import json
import math

import mpmath as mp
import pytest

from expburgers.asymptotics import format_number, run_pipeline
from expburgers.cli import (
    EXIT_CONFIG,
    EXIT_OVERWRITE,
    EXIT_SOLVER,
    EXIT_TERM_CAP,
    EXIT_TRANSFORM,
    main,
    read_spectrum,
)
from expburgers.experiments import exact_sequence


def write_config(tmp_path, name="cfg.json", **kw):
    p = tmp_path / name
    p.write_text(json.dumps(kw))
    return str(p)


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


EXACT = dict(family="exponential", sigma=0.5, check_precision_bits=0)


def test_simulate_outputs_and_determinism(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["simulate", cfg, "-o", str(tmp_path / "a")]) == 0
    assert main(["simulate", cfg, "-o", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "spectrum.csv").read_bytes()
    assert a == (tmp_path / "b" / "spectrum.csv").read_bytes()
    data = rows(tmp_path / "a" / "spectrum.csv")
    assert list(data[0]) == ["k", "re_u", "im_u", "abs_u", "noise_flag"]
    clean = [r for r in data if r["noise_flag"] == "0"]
    assert len(clean) >= 15
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["dt"] == 1e-3 and summary["grid"]["k_max"] == 21


def test_refuses_to_overwrite(tmp_path):
    cfg = write_config(tmp_path, K=2, **EXACT)
    out = str(tmp_path / "out")
    assert main(["exact", cfg, "-o", out]) == 0
    assert main(["exact", cfg, "-o", out]) == EXIT_OVERWRITE
    assert main(["exact", cfg, "-o", out, "--force"]) == 0


@pytest.mark.parametrize(
    "cfg",
    [
        {"t_end": 0},
        {"dt": 0.3},
        {"family": "quadratic"},
        {"bogus_key": 1},
        {"n_collocation": 7},
        {"initial_condition": "gaussian"},
    ],
)
def test_bad_config_exit_code(tmp_path, capsys, cfg):
    path = write_config(tmp_path, **cfg)
    assert main(["simulate", path, "-o", str(tmp_path / "o")]) == EXIT_CONFIG
    key = next(iter(cfg))
    assert key in capsys.readouterr().err


def test_solver_failure_exit_code(tmp_path):
    path = write_config(
        tmp_path,
        initial_condition="single_complex_mode",
        amplitude=[0, 1e200],
        dt=0.1,
        t_end=1.0,
    )
    with pytest.warns(RuntimeWarning):
        code = main(["simulate", path, "-o", str(tmp_path / "o")])
    assert code == EXIT_SOLVER


def test_term_cap_exit_code(tmp_path, capsys):
    path = write_config(tmp_path, K=12, term_cap=50, **EXACT)
    assert main(["exact", path, "-o", str(tmp_path / "o")]) == EXIT_TERM_CAP
    assert "at k=" in capsys.readouterr().err


def test_exact_k1_and_k2(tmp_path):
    out = tmp_path / "o"
    assert main(["exact", write_config(tmp_path, K=1, **EXACT), "-o", str(out)]) == 0
    (r1,) = rows(out / "exact.csv")
    with mp.workprec(256):
        assert mp.mpf(r1["vhat"]) == mp.exp(-mp.e)
    assert main(["exact", write_config(tmp_path, K=2, **EXACT), "-o", str(out), "--force"]) == 0
    r = rows(out / "exact.csv")
    assert [x["k"] for x in r] == ["1", "2"]
    with mp.workprec(256):
        want = (mp.exp(-2 * mp.e) - mp.exp(-mp.e**2)) / (mp.e**2 - 2 * mp.e)
        assert abs(mp.mpf(r[1]["vhat"]) / want - 1) < mp.mpf(10) ** -70
    assert r[1]["terms"] == "2" and r[1]["precision_bits"] == "256"


def test_exact_consistency_summary(tmp_path):
    path = write_config(tmp_path, K=8, family="exponential", sigma=0.5)
    assert main(["exact", path, "-o", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["consistency"]["passed"]


def _drop_labels(obj):
    if isinstance(obj, dict):
        return {k: _drop_labels(v) for k, v in obj.items() if k != "label"}
    if isinstance(obj, list):
        return [_drop_labels(v) for v in obj]
    return obj


def test_exact_to_extrapolate_round_trip(tmp_path):
    K = 14
    path = write_config(tmp_path, K=K, **EXACT)
    assert main(["exact", path, "-o", str(tmp_path / "e")]) == 0
    seq = read_spectrum(tmp_path / "e" / "exact.csv")
    mem = exact_sequence(K)
    assert seq.values == mem.values
    assert main(["extrapolate", str(tmp_path / "e" / "exact.csv"), "-o", str(tmp_path / "x")]) == 0
    report = json.loads((tmp_path / "x" / "report.json").read_text())
    in_process = run_pipeline(mem)
    assert _drop_labels(report) == _drop_labels(json.loads(json.dumps(in_process.to_dict())))
    trace = rows(tmp_path / "x" / "discrepancy.csv")
    assert [r["discrepancy"] for r in trace] == [
        format_number(x, 256) for x in in_process.discrepancy_trace.values
    ]


def test_extrapolate_transform_failure(tmp_path, capsys):
    p = tmp_path / "s.csv"
    p.write_text("k,abs_u,noise_flag\n1,1.0,0\n2,1.0,0\n3,1.0,0\n4,1.0,0\n5,1.0,0\n6,1.0,0\n")
    code = main(["extrapolate", str(p), "-o", str(tmp_path / "x")])
    assert code == EXIT_TRANSFORM
    assert "stage" in capsys.readouterr().err


def test_discrepancy_on_simulation(tmp_path):
    assert main(["simulate", write_config(tmp_path), "-o", str(tmp_path / "s")]) == 0
    spec = str(tmp_path / "s" / "spectrum.csv")
    assert main(["discrepancy", spec, "-o", str(tmp_path / "d")]) == 0
    chk = json.loads((tmp_path / "d" / "decay_check.json").read_text())
    assert chk["passed"]
    d = rows(tmp_path / "d" / "naive_discrepancy.csv")
    assert d[0]["k"] == "2"


def test_predict(tmp_path):
    path = write_config(tmp_path, family="stretched_exponential", sigma=0.5, alpha=2.0)
    assert main(["predict", path, "-o", str(tmp_path / "p")]) == 0
    pred = json.loads((tmp_path / "p" / "prediction.json").read_text())
    assert pred["closed_form"] == {"kind": "PowerAlpha", "coefficient": 2.0, "alpha": 2.0}
    bad = write_config(tmp_path, "bad.json", family="stretched_exponential", sigma=0.5, alpha=0.5)
    assert main(["predict", bad, "-o", str(tmp_path / "q")]) == EXIT_CONFIG


def test_reproduce_fig1_prints_headline(tmp_path, capsys):
    assert main(["reproduce", "fig1", "-o", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "reported: 0.035" in out
    assert (tmp_path / "fig1_discrepancy.csv").exists()


def test_slaving_example_via_cli(tmp_path):
    a = write_config(tmp_path, "a.json", dt=1e-3)
    b = write_config(tmp_path, "b.json", dt=5e-3)
    assert main(["simulate", a, "-o", str(tmp_path / "a")]) == 0
    assert main(["simulate", b, "-o", str(tmp_path / "b")]) == 0
    ra, rb = rows(tmp_path / "a" / "spectrum.csv"), rows(tmp_path / "b" / "spectrum.csv")
    for x, y in zip(ra[:12], rb[:12]):
        za = complex(float(x["re_u"]), float(x["im_u"]))
        zb = complex(float(y["re_u"]), float(y["im_u"]))
        assert abs(za - zb) < 1e-6
