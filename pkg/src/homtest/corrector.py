"""Exact and Monte-Carlo analysis machinery: rejection probabilities,
the plurality-vote corrector, flatness probes, and closed-form math
facts used by the experiment suite."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import groups, functions
from .functions import FunctionTable, Homomorphism
from .groups import GroupSpec, ResourceLimitError
from .rng import Stream

EXACT_GUARD = 10**8


# ---------------------------------------------------------------------------
# exact rejection probability of the k-point signs test


def exact_rejection_probability(f: FunctionTable, k: int) -> Fraction:
    """Exact Pr over all (sign, element)^k tuples that the signed sum of
    f-values disagrees with f at the ordered signed sum.

    Computed by dynamic programming over the joint distribution of the
    prefix sums in G and H; same value as direct tuple enumeration, which
    the tests cross-check at tiny sizes.
    """
    g, h = f.domain, f.codomain
    if f.implicit:
        raise functions.FunctionError("exact probabilities need a dense table")
    if (2 * g.order) ** k > EXACT_GUARD:
        raise ResourceLimitError("tuple space too large for exact computation")
    g_elems = list(groups.elements(g))
    h_index = {e: i for i, e in enumerate(list(groups.elements(h)))}
    # transitions: one per (sign, element) choice
    steps = []
    for x in g_elems:
        fx = f.values[x]
        steps.append((x, fx))  # plus
        steps.append((groups.inverse(g, x), groups.inverse(h, fx)))  # minus
    counts: dict[tuple[int, int], int] = {(groups.identity(g), groups.identity(h)): 1}
    for _ in range(k):
        nxt: dict[tuple[int, int], int] = {}
        for (a, b), c in counts.items():
            for dx, dv in steps:
                key = (groups.op(g, a, dx), groups.op(h, b, dv))
                nxt[key] = nxt.get(key, 0) + c
        counts = nxt
    total = (2 * g.order) ** k
    rejecting = sum(c for (a, b), c in counts.items() if b != f.values[a])
    return Fraction(rejecting, total)


def brute_force_rejection_probability(f: FunctionTable, k: int) -> Fraction:
    """Direct enumeration of all sign/element tuples; oracle for the DP."""
    g, h = f.domain, f.codomain
    if (2 * g.order) ** k > 10**6:
        raise ResourceLimitError("brute force cap")
    g_elems = list(groups.elements(g))
    signs = [groups.PLUS, groups.MINUS]
    rejecting = 0
    for combo in itertools.product(signs, g_elems, repeat=k):
        entries = [(combo[2 * i], combo[2 * i + 1]) for i in range(k)]
        a = groups.signed_sum(g, entries)
        acc = groups.identity(h)
        for s, x in entries:
            acc = groups.op(h, acc, groups.entry_apply(h, s, f.values[x]))
        if acc != f.values[a]:
            rejecting += 1
    return Fraction(rejecting, (2 * g.order) ** k)


# ---------------------------------------------------------------------------
# Fix(a) samplers


def sample_fix_a(g: GroupSpec, a: int, k2: int, rng: Stream) -> list[tuple[str, int]]:
    """Uniform tuple of k2 signs and elements whose ordered signed sum is
    a: draw everything but the last element, then solve for it."""
    if k2 < 2:
        raise ValueError("k2 must be >= 2")
    signs = [groups.MINUS if rng.rand_below(2) else groups.PLUS for _ in range(k2)]
    xs = [groups.sample_uniform(g, rng) for _ in range(k2 - 1)]
    prefix = groups.signed_sum(g, list(zip(signs, xs)))
    v = groups.op(g, groups.inverse(g, prefix), a)
    last = v if signs[-1] == groups.PLUS else groups.inverse(g, v)
    return list(zip(signs, xs + [last]))


def sample_fix_a_split(g: GroupSpec, a: int, k2: int, rng: Stream) -> list[tuple[str, int]]:
    """Alternative two-halves draw: pick the right half's sum z uniformly,
    then draw each half conditioned on its sum. Same distribution as
    sample_fix_a; the tests compare them exhaustively."""
    if k2 < 2 or k2 % 2:
        raise ValueError("k2 must be even and >= 2")
    k = k2 // 2
    z = groups.sample_uniform(g, rng)
    left_target = groups.op(g, a, groups.inverse(g, z))
    left = _half_fix(g, left_target, k, rng)
    right = _half_fix(g, z, k, rng)
    return left + right


def _half_fix(g: GroupSpec, target: int, k: int, rng: Stream) -> list[tuple[str, int]]:
    if k == 1:
        sign = groups.MINUS if rng.rand_below(2) else groups.PLUS
        x = target if sign == groups.PLUS else groups.inverse(g, target)
        return [(sign, x)]
    return sample_fix_a(g, target, k, rng)


def enumerate_fix_a(g: GroupSpec, a: int, k2: int) -> list[tuple]:
    """All tuples in Fix(a), for exhaustive checks (tiny groups only)."""
    g_elems = list(groups.elements(g))
    if (2 * g.order) ** k2 > 10**7:
        raise ResourceLimitError("Fix(a) enumeration cap")
    out = []
    signs = [groups.PLUS, groups.MINUS]
    for combo in itertools.product(signs, g_elems, repeat=k2):
        entries = tuple((combo[2 * i], combo[2 * i + 1]) for i in range(k2))
        if groups.signed_sum(g, list(entries)) == a:
            out.append(entries)
    return out


# ---------------------------------------------------------------------------
# the corrector


@dataclass
class CorrectorReport:
    mu: Fraction | float
    eta_per_element: dict[int, float]
    eta_max: float
    delta: Fraction | float
    g: FunctionTable
    g_is_hom: bool
    exact: bool
    k2: int = 0

    def __post_init__(self):
        assert self.eta_max == (max(self.eta_per_element.values()) if self.eta_per_element else 0)


def _vote(f: FunctionTable, entries) -> int:
    h = f.codomain
    acc = groups.identity(h)
    for s, x in entries:
        acc = groups.op(h, acc, groups.entry_apply(h, s, f.values[x]))
    return acc


def corrector(f: FunctionTable, k2: int, mode: str = "exact", samples: int = 10000, rng: Optional[Stream] = None) -> CorrectorReport:
    """Plurality-vote corrector g(a) over Fix(a), with mu/eta/delta.

    Ties in the vote go to the canonically smallest codomain element.
    """
    g, h = f.domain, f.codomain
    h_order = list(groups.elements(h))
    g_values = [0] * g.encoding_bound
    eta: dict[int, float] = {}
    if mode == "exact":
        mu = exact_rejection_probability(f, k2)
        for a in groups.elements(g):
            votes = Counter()
            fix = enumerate_fix_a(g, a, k2)
            for entries in fix:
                votes[_vote(f, entries)] += 1
            best = max(votes.values())
            winner = next(e for e in h_order if votes.get(e) == best)
            g_values[a] = winner
            eta[a] = 1 - Fraction(votes[winner], len(fix))
        exact = True
    elif mode == "monte_carlo":
        if rng is None:
            raise ValueError("monte_carlo mode needs an rng")
        # mu by sampling the 2k-point test tuple space directly
        rej = 0
        for _ in range(samples):
            entries = [
                ((groups.MINUS if rng.rand_below(2) else groups.PLUS), groups.sample_uniform(g, rng))
                for _ in range(k2)
            ]
            a = groups.signed_sum(g, entries)
            if _vote(f, entries) != f.values[a]:
                rej += 1
        mu = rej / samples
        for a in groups.elements(g):
            votes = Counter()
            for _ in range(samples):
                votes[_vote(f, sample_fix_a(g, a, k2, rng))] += 1
            best = max(votes.values())
            winner = next(e for e in h_order if votes.get(e) == best)
            g_values[a] = winner
            eta[a] = 1 - votes[winner] / samples
        exact = False
    else:
        raise ValueError(f"unknown mode {mode!r}")

    g_table = FunctionTable(g, h, values=g_values, label="corrected")
    delta = functions.distance(f, g_table)
    try:
        homs = functions.enumerate_homomorphisms(g, h)
        g_is_hom = any(all(g_values[x] == hom.table[x] for x in groups.elements(g)) for hom in homs)
    except ResourceLimitError:
        g_is_hom = False
    return CorrectorReport(
        mu=mu,
        eta_per_element=eta,
        eta_max=max(eta.values()),
        delta=delta,
        g=g_table,
        g_is_hom=g_is_hom,
        exact=exact,
        k2=k2,
    )


# ---------------------------------------------------------------------------
# flatness / unpredictability probes


@dataclass
class FlatnessReport:
    m: int
    samples_of_X: int
    per_X_max_mass: list[float]
    per_X_deficient: list[bool]
    support_deficit_fraction: float
    alpha_empirical: float
    beta_empirical: float
    agreement_probabilities: list[float] = field(default_factory=list)
    regime_violated: bool = False
    full_support: int = 0

    def max_mass_csv(self) -> str:
        lines = ["draw,max_mass"]
        lines += [f"{i},{v}" for i, v in enumerate(self.per_X_max_mass)]
        return "\n".join(lines)


def _half_subsets(m: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(m), m // 2))


def flatness_probe(
    G: GroupSpec,
    f: Optional[FunctionTable],
    m: int,
    x_draws: int,
    rng: Stream,
    coefficient: bool = False,
    tuple_draws: int = 0,
    agreement_k: int = 0,
) -> FlatnessReport:
    """Conditional distribution of the combined final query.

    For each drawn X of m uniform points, enumerate every sign (or
    coefficient) vector and half-subset, and record the conditional
    distribution of y. A draw is support-deficient when some sign vector
    yields fewer than C(m, m/2) distinct sums (coefficient variant: when
    the combined support misses C(m,m/2) * (p-1)^(m/2) points).
    """
    if m % 2:
        raise ValueError("m must be even")
    subsets = _half_subsets(m)
    full = len(subsets)
    p = G.p if G.kind == "vector" else 0
    if coefficient:
        if G.kind != "vector":
            raise ValueError("coefficient probe needs a vector-space group")
        full = len(subsets) * (p - 1) ** (m // 2)
    regime_violated = (
        (2**m) ** 4 > G.order if not coefficient else (G.kind != "vector" or m > G.n / 4)
    )

    per_x_max = []
    per_x_deficient = []
    for _ in range(x_draws):
        xs = [groups.sample_uniform(G, rng) for _ in range(m)]
        mass: Counter = Counter()
        deficient = False
        if coefficient:
            support = set()
            for combo in itertools.product(range(1, p), repeat=m):
                for sub in subsets:
                    y = groups.signed_sum(G, [(combo[j], xs[j]) for j in sub])
                    support.add(y)
                    mass[y] += 1
            if len(support) < full:
                deficient = True
        else:
            for sigma in itertools.product((groups.PLUS, groups.MINUS), repeat=m):
                seen = set()
                for sub in subsets:
                    y = groups.signed_sum(G, [(sigma[j], xs[j]) for j in sub])
                    seen.add(y)
                    mass[y] += 1
                if len(seen) < full:
                    deficient = True
        total = sum(mass.values())
        per_x_max.append(max(mass.values()) / total)
        per_x_deficient.append(deficient)
    deficit_fraction = sum(per_x_deficient) / x_draws
    alpha = m / G.order + max(per_x_max)
    report = FlatnessReport(
        m=m,
        samples_of_X=x_draws,
        per_X_max_mass=per_x_max,
        per_X_deficient=per_x_deficient,
        support_deficit_fraction=deficit_fraction,
        alpha_empirical=alpha,
        beta_empirical=deficit_fraction,
        regime_violated=regime_violated,
        full_support=full,
    )
    if f is not None and agreement_k > 0 and tuple_draws > 0:
        report.agreement_probabilities = agreement_probabilities(f, agreement_k, tuple_draws, rng)
    return report


def agreement_probabilities(f: FunctionTable, max_k: int, draws: int, rng: Stream) -> list[float]:
    """p_k: chance the signed sum of k f-values agrees with the nearest
    homomorphism at the combined point."""
    _, nearest = functions.distance_to_hom(f)
    g = f.domain
    out = []
    for k in range(1, max_k + 1):
        agree = 0
        for _ in range(draws):
            entries = [
                ((groups.MINUS if rng.rand_below(2) else groups.PLUS), groups.sample_uniform(g, rng))
                for _ in range(k)
            ]
            a = groups.signed_sum(g, entries)
            if _vote(f, entries) == nearest.table[a]:
                agree += 1
        out.append(agree / draws)
    return out


# ---------------------------------------------------------------------------
# closed-form facts


def linear_independence_probability(p: int, n: int, draws: int, rng: Stream) -> float:
    """Empirical chance that ceil(n/2) uniform vectors of F_p^n are
    linearly independent."""
    g = groups.vector_space(p, n)
    k = math.ceil(n / 2)
    hits = 0
    for _ in range(draws):
        vs = [groups.sample_uniform(g, rng) for _ in range(k)]
        hits += groups.rank_fp(g, vs) == k
    return hits / draws


def exact_linear_independence_probability(p: int, n: int) -> Fraction:
    k = math.ceil(n / 2)
    out = Fraction(1)
    for i in range(k):
        out *= 1 - Fraction(p**i, p**n)
    return out


def binomial_even_probability(n: int, p) -> Fraction | float:
    if n < 0 or not 0 <= float(p) <= 1:
        raise ValueError("need n >= 0 and p in [0,1]")
    q = Fraction(p) if not isinstance(p, float) else p
    return (1 + (1 - 2 * q) ** n) / 2


def zeta_upper_bound(x: float) -> float:
    if x < 2:
        raise ValueError("bound holds for x >= 2")
    return 1 + 1 / (2 ** (x - 1) - 1)


def zeta_truncated_upper(x: float, terms: int = 100000) -> float:
    """Partial sum plus an integral tail bound, so the result is an upper
    bound on the true value."""
    s = sum(k ** (-x) for k in range(1, terms + 1))
    tail = terms ** (1 - x) / (x - 1)
    return s + tail
