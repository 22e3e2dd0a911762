"""Command-line surface.

Exit codes: 0 success, 1 acceptance-matrix failure, 2 configuration error.
The default seed comes from HOMTEST_SEED when set.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from . import corrector, groups, harness
from .groups import GroupError, ResourceLimitError
from .harness import ConfigError, ExperimentConfig, run_experiment, write_jsonl
from .rng import ROLE_INSTANCE, stream

_SEED = click.option(
    "--seed", type=int, default=0, envvar="HOMTEST_SEED", show_default=True
)


@click.group()
def main():
    """Group homomorphism testing experiments."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), help="JSON config file")
@click.option("--domain", help="domain group spec, e.g. F2^8")
@click.option("--codomain", help="codomain group spec, e.g. Z6")
@click.option("--instance", "instance_kind", default="random_hom", show_default=True)
@click.option("--tester", "tester_name", default="signs", show_default=True)
@click.option("--adversary", "adversary_name", default="null", show_default=True)
@click.option("--t", type=int, default=0, show_default=True, help="erasure budget per query")
@click.option("--trials", type=int, default=1000, show_default=True)
@_SEED
@click.option("--out", type=click.Path(), help="write the report as JSONL")
def run(config_path, domain, codomain, instance_kind, tester_name, adversary_name, t, trials, seed, out):
    """Run one experiment from a config file or from flags."""
    try:
        if config_path:
            with open(config_path) as fh:
                d = json.load(fh)
            d.setdefault("seed", seed)
            cfg = ExperimentConfig.from_dict(d)
        else:
            if not domain or not codomain:
                raise ConfigError("need --config or both --domain and --codomain")
            cfg = ExperimentConfig(
                group_domain=domain,
                group_codomain=codomain,
                instance={"kind": instance_kind},
                tester={"name": tester_name},
                adversary={"name": adversary_name, "t": t},
                trials=trials,
                seed=seed,
            )
        rep = run_experiment(cfg)
    except (ConfigError, GroupError, json.JSONDecodeError) as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)
    if out:
        write_jsonl([rep], out)
    lo, hi = rep.accept_interval
    click.echo(
        f"accept {rep.accept_count}/{cfg.trials} rate={rep.accept_rate:.4f} "
        f"ci95=({lo:.4f},{hi:.4f}) queries={rep.mean_queries:.2f} "
        f"erasures={rep.mean_erasures_seen:.2f} backend={rep.backend} "
        f"flags={','.join(rep.regime_flags)}"
    )


@main.command()
@click.option("--trials", type=int, default=10_000, show_default=True)
@click.option("--quick", is_flag=True, help="desk-scale matrix (200 trials per cell)")
@click.option("--out", type=click.Path(), help="write all cell reports as JSONL")
def zoo(trials, quick, out):
    """Run the built-in completeness acceptance matrix."""
    if quick:
        trials = 200
    ok, reports = harness.run_zoo(trials=trials)
    if out:
        write_jsonl(reports, out)
    bad = [r for r in reports if r.reject_count]
    for r in bad:
        c = r.config_echo
        click.echo(
            f"FAIL {c['group_domain']}->{c['group_codomain']} {c['tester']['name']} "
            f"{c['adversary']['name']} t={c['adversary']['t']}: {r.reject_count} rejects"
        )
    click.echo(f"{len(reports) - len(bad)}/{len(reports)} cells fully accepted")
    sys.exit(0 if ok else 1)


@main.command("probe-flatness")
@click.option("--group", "group_spec", required=True, help="vector-space spec, e.g. F2^24")
@click.option("--m", type=int, default=4, show_default=True)
@click.option("--draws", type=int, default=1000, show_default=True)
@click.option("--coefficient", is_flag=True, help="coefficient-vector variant")
@_SEED
@click.option("--csv", "csv_path", type=click.Path(), help="write per-draw max masses as CSV")
def probe_flatness(group_spec, m, draws, coefficient, seed, csv_path):
    """Probe how flat the combined-query distribution is."""
    try:
        g = groups.parse_spec(group_spec)
        rep = corrector.flatness_probe(
            g, None, m, draws, stream(seed, 0, ROLE_INSTANCE), coefficient=coefficient
        )
    except (GroupError, ValueError) as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write(rep.max_mass_csv() + "\n")
    click.echo(
        f"m={m} draws={draws} deficit_fraction={rep.support_deficit_fraction:.4f} "
        f"worst_max_mass={max(rep.per_X_max_mass):.4f} full_support={rep.full_support} "
        f"regime_violated={rep.regime_violated}"
    )


@main.command("estimate-e")
@click.option("--group", "group_spec", required=True)
@click.option("--trials", type=int, default=2000, show_default=True)
@_SEED
def estimate_e(group_spec, trials, seed):
    """Estimate the expected number of uniform samples that generate G."""
    try:
        g = groups.parse_spec(group_spec)
        est = groups.estimate_E(g, trials, stream(seed, 0, ROLE_INSTANCE), betas=(1 / 12,))
    except (GroupError, ResourceLimitError) as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)
    click.echo(
        f"E[{group_spec}] ~ {est.e_estimate:.3f} (se {est.e_std_error:.3f}, "
        f"{trials} trials); d(1/12)={est.d_beta_estimates.get(1 / 12)}"
    )


@main.command("lowerbound-demo")
@click.option("--p", type=int, default=2, show_default=True)
@click.option("--n", type=int, default=3, show_default=True)
@click.option("--t", type=int, default=4, show_default=True)
@click.option("--trials", type=int, default=100_000, show_default=True)
@_SEED
def lowerbound_demo(p, n, t, trials, seed):
    """Transcript-distribution comparison for fixed query policies."""
    if p != 2:
        click.echo("config error: only p=2 is supported", err=True)
        sys.exit(2)
    res = harness.lowerbound_demo(n=n, t=t, trials=trials, seed=seed)
    click.echo(
        f"two-query policy, span eraser t={t}: TV(hom view, random view) = "
        f"{res['tv_two_query']:.4f}"
    )
    click.echo(
        f"four-query policy with spanned point, t=0: TV = {res['tv_spanned_query']:.4f}"
    )


@main.command()
def formulas():
    """Evaluate the closed-form helper formulas."""
    for n in (2, 4, 8):
        for pr in (Fraction(0), Fraction(1, 4), Fraction(1, 2)):
            v = corrector.binomial_even_probability(n, pr)
            click.echo(f"P(even successes | n={n}, p={pr}) = {v}")
    for x in (2.0, 2.5, 3.0, 4.0):
        click.echo(
            f"zeta({x}) <= {corrector.zeta_upper_bound(x):.6f} "
            f"(truncated series {corrector.zeta_truncated_upper(x):.6f})"
        )


if __name__ == "__main__":
    main()
