import json
import math

import pytest
from click.testing import CliRunner

from homtest import cli, harness
from homtest.harness import (
    ConfigError,
    ExperimentConfig,
    run_experiment,
    wilson_interval,
    write_jsonl,
    zero_hom_instance,
)
from homtest import groups


def _cfg(**kw):
    base = dict(
        group_domain="Z5",
        group_codomain="Z5",
        instance={"kind": "random_hom"},
        tester={"name": "signs", "k": 4},
        adversary={"name": "uniform", "t": 1},
        trials=200,
        seed=5,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_wilson_endpoints():
    assert wilson_interval(0, 50)[0] == 0.0
    assert wilson_interval(50, 50)[1] == 1.0
    lo, hi = wilson_interval(50, 100, 1.96)
    assert math.isclose(lo, 0.404, abs_tol=0.001)
    assert math.isclose(hi, 0.596, abs_tol=0.001)


def test_wilson_rejects_bad_inputs():
    with pytest.raises(ValueError):
        wilson_interval(5, 4)
    with pytest.raises(ValueError):
        wilson_interval(-1, 4)


def test_config_validates_specs():
    with pytest.raises(Exception):
        ExperimentConfig(group_domain="??", group_codomain="Z2")
    with pytest.raises(ConfigError):
        _cfg(trials=0)


def test_config_round_trip():
    cfg = _cfg()
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_hom_always_accepted():
    rep = run_experiment(_cfg(trials=50))
    assert rep.accept_count == 50 and rep.reject_count == 0
    assert rep.accept_rate == 1.0
    assert rep.accept_interval[0] <= rep.accept_rate <= rep.accept_interval[1]


def test_report_counts_sum_to_trials():
    rep = run_experiment(_cfg(instance={"kind": "random_function"}, trials=80))
    assert rep.accept_count + rep.reject_count == 80


def test_reruns_are_identical():
    r1 = run_experiment(_cfg(trials=120))
    r2 = run_experiment(_cfg(trials=120))
    d1, d2 = r1.to_json_dict(), r2.to_json_dict()
    d1.pop("wall_time"), d2.pop("wall_time")
    assert d1 == d2


def test_random_function_buckets_stratified():
    rep = run_experiment(_cfg(instance={"kind": "random_function"}, trials=150))
    assert rep.buckets
    total = sum(b["accepts"] + b["rejects"] for b in rep.buckets.values())
    assert total == 150
    # exact-distance labels parse back to fractions in [0, 1)
    for label in rep.buckets:
        from fractions import Fraction

        assert 0 <= Fraction(label) < 1


def test_regime_flags_present():
    rep = run_experiment(_cfg(trials=10))
    assert any(f.startswith("theorem_range=") for f in rep.regime_flags)


def test_zero_hom_instance_is_constant_identity():
    g, h = groups.parse_spec("S3"), groups.parse_spec("Z4")
    f = zero_hom_instance(g, h)
    assert all(f(x) == groups.identity(h) for x in groups.elements(g))


def test_write_jsonl(tmp_path):
    rep = run_experiment(_cfg(trials=10))
    path = tmp_path / "out.jsonl"
    write_jsonl([rep, rep], str(path))
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["accept_count"] == 10


def test_zoo_cells_cover_matrix():
    cells = harness.zoo_cells(trials=5)
    pairs = {(c.group_domain, c.group_codomain) for c in cells}
    assert len(pairs) == 7
    # span eraser only on vector-space domains
    for c in cells:
        if c.adversary["name"] == "span":
            assert groups.parse_spec(c.group_domain).kind == "vector"
    # coefficient testers only on matching prime-field pairs
    for c in cells:
        if "coeff" in c.tester["name"] or c.tester["name"] == "dispatch-prime":
            g = groups.parse_spec(c.group_domain)
            h = groups.parse_spec(c.group_codomain)
            assert g.kind == h.kind == "vector" and g.p == h.p


def test_lowerbound_demo_separation():
    res = harness.lowerbound_demo(n=3, t=4, trials=4000, seed=1)
    assert res["tv_two_query"] < res["tv_spanned_query"]


# CLI


def test_cli_run_flags(tmp_path):
    out = tmp_path / "r.jsonl"
    res = CliRunner().invoke(
        cli.main,
        ["run", "--domain", "Z5", "--codomain", "Z5", "--trials", "50", "--seed", "3", "--out", str(out)],
    )
    assert res.exit_code == 0, res.output
    assert "accept 50/50" in res.output
    assert json.loads(out.read_text())["accept_count"] == 50


def test_cli_run_config_file(tmp_path):
    cfgfile = tmp_path / "exp.json"
    cfgfile.write_text(json.dumps(_cfg(trials=20).to_dict()))
    res = CliRunner().invoke(cli.main, ["run", "--config", str(cfgfile)])
    assert res.exit_code == 0, res.output


def test_cli_run_bad_spec_exits_2():
    res = CliRunner().invoke(cli.main, ["run", "--domain", "??", "--codomain", "Z2"])
    assert res.exit_code == 2


def test_cli_run_missing_args_exits_2():
    res = CliRunner().invoke(cli.main, ["run"])
    assert res.exit_code == 2


def test_cli_probe_flatness_csv(tmp_path):
    csv = tmp_path / "f.csv"
    res = CliRunner().invoke(
        cli.main,
        ["probe-flatness", "--group", "F2^10", "--m", "4", "--draws", "20", "--csv", str(csv)],
    )
    assert res.exit_code == 0, res.output
    assert csv.read_text().startswith("draw,max_mass")


def test_cli_estimate_e():
    res = CliRunner().invoke(cli.main, ["estimate-e", "--group", "Z5", "--trials", "200"])
    assert res.exit_code == 0, res.output
    assert "E[Z5]" in res.output


def test_cli_formulas():
    res = CliRunner().invoke(cli.main, ["formulas"])
    assert res.exit_code == 0
    assert "zeta" in res.output


def test_cli_lowerbound_demo():
    res = CliRunner().invoke(cli.main, ["lowerbound-demo", "--trials", "2000"])
    assert res.exit_code == 0, res.output
    assert "TV" in res.output


def test_cli_seed_env(monkeypatch, tmp_path):
    monkeypatch.setenv("HOMTEST_SEED", "77")
    out1 = tmp_path / "a.jsonl"
    res = CliRunner().invoke(
        cli.main, ["run", "--domain", "Z5", "--codomain", "Z5", "--trials", "5", "--out", str(out1)]
    )
    assert res.exit_code == 0
    assert json.loads(out1.read_text())["config_echo"]["seed"] == 77
