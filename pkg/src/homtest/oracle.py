"""The online-manipulation query channel.

An Oracle answers each query from the current (possibly manipulated)
function state, then hands control to an adversary strategy which may
spend budget on erasures or corruptions. Timing is strict: manipulation
happens only after an answer is delivered, never before the first query.

Budget schedules:

* fixed_rate: allowance resets to t after each answer; unused allowance
  is forfeited.
* budget_managing: t credits accrue per answered query and may be saved
  up and spent later, all at once if the strategy likes.

Re-queries are answered from current state, so a point erased after its
first answer returns bottom the second time. Erasure is monotone; there
is no un-erase.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import groups
from .functions import FunctionTable
from .groups import GroupSpec, ResourceLimitError
from .rng import Stream

BOTTOM = None  # erased answers

ERASURE = "erasure"
CORRUPTION = "corruption"
FIXED_RATE = "fixed_rate"
BUDGET_MANAGING = "budget_managing"


class ProtocolViolation(RuntimeError):
    """The strategy tried to spend more than its available budget."""


@dataclass
class Transcript:
    entries: list[tuple[int, Optional[int]]] = field(default_factory=list)

    def append(self, query: int, answer: Optional[int]) -> None:
        self.entries.append((query, answer))

    def queries(self) -> list[int]:
        return [q for q, _ in self.entries]

    def answers(self) -> tuple:
        return tuple(a for _, a in self.entries)

    def to_jsonl(self, domain: GroupSpec, codomain: GroupSpec) -> str:
        lines = []
        for q, a in self.entries:
            lines.append(
                json.dumps(
                    {
                        "query": groups.element_text(domain, q),
                        "answer": "⊥" if a is BOTTOM else groups.element_text(codomain, a),
                    },
                    ensure_ascii=False,
                )
            )
        return "\n".join(lines)


# A strategy is invoked after each answer with the oracle (read-only by
# convention) and returns a list of targets: elements in erasure mode,
# (element, value) pairs in corruption mode.
Strategy = Callable[["Oracle"], list]


class Oracle:
    def __init__(
        self,
        base: FunctionTable,
        strategy: Optional[Strategy] = None,
        mode: str = ERASURE,
        schedule: str = FIXED_RATE,
        t: int = 0,
    ):
        if mode not in (ERASURE, CORRUPTION):
            raise ValueError(f"bad mode {mode!r}")
        if schedule not in (FIXED_RATE, BUDGET_MANAGING):
            raise ValueError(f"bad schedule {schedule!r}")
        self.base = base
        self.domain = base.domain
        self.codomain = base.codomain
        self.strategy = strategy
        self.mode = mode
        self.schedule = schedule
        self.t = t
        self.overrides: dict[int, Optional[int]] = {}
        self.budget_available = 0
        self.queries_answered = 0
        self.manipulations_made = 0
        self.bottoms_returned = 0
        self.transcript = Transcript()

    def query(self, x: int) -> Optional[int]:
        if x in self.overrides:
            ans = self.overrides[x]
        else:
            ans = self.base(x)
        self.transcript.append(x, ans)
        self.queries_answered += 1
        if ans is BOTTOM:
            self.bottoms_returned += 1
        if self.schedule == FIXED_RATE:
            self.budget_available = self.t
        else:
            self.budget_available += self.t
        if self.strategy is not None:
            targets = self.strategy(self)
            if len(targets) > self.budget_available:
                raise ProtocolViolation(
                    f"strategy returned {len(targets)} targets with budget {self.budget_available}"
                )
            for target in targets:
                if self.mode == ERASURE:
                    self.overrides[target] = BOTTOM
                else:
                    elem, value = target
                    self.overrides[elem] = value
            self.manipulations_made += len(targets)
            self.budget_available -= len(targets)
        if self.schedule == FIXED_RATE:
            self.budget_available = 0
        return ans


# ---------------------------------------------------------------------------
# built-in strategies


def strategy_null() -> Strategy:
    return lambda oracle: []


def strategy_uniform_eraser(rng: Stream) -> Strategy:
    """Erase uniformly random not-yet-manipulated points, full budget."""

    def act(oracle: Oracle) -> list:
        want = oracle.budget_available
        room = oracle.domain.order - len(oracle.overrides)
        want = min(want, room)
        targets: list[int] = []
        picked = set()
        while len(targets) < want:
            x = groups.sample_uniform(oracle.domain, rng)
            if x in oracle.overrides or x in picked:
                continue
            picked.add(x)
            targets.append(x)
        return targets

    return act


def strategy_sum_hunter(w: int) -> Strategy:
    """Erase the signed combinations of recent queries: the points a naive
    three-query linearity tester would ask next.

    Candidates come from the last w distinct queries, subsets enumerated
    largest-first (the full combination x1+...+xw is the juiciest target),
    signs all-plus first; already-manipulated points and the queries
    themselves are skipped. Deterministic, no randomness needed.
    """

    def act(oracle: Oracle) -> list:
        budget = oracle.budget_available
        if budget == 0:
            return []
        g = oracle.domain
        window: list[int] = []
        for q in reversed(oracle.transcript.queries()):
            if q not in window:
                window.append(q)
            if len(window) == w:
                break
        window.reverse()
        queried = set(oracle.transcript.queries())
        targets: list[int] = []
        chosen = set()
        nw = len(window)
        for size in range(nw, 0, -1):
            for mask in range(1, 1 << nw):
                if bin(mask).count("1") != size:
                    continue
                picks = [window[i] for i in range(nw) if mask >> i & 1]
                for signs in range(1 << size):
                    entries = [
                        (groups.MINUS if signs >> i & 1 else groups.PLUS, picks[i])
                        for i in range(size)
                    ]
                    y = groups.signed_sum(g, entries)
                    if y in oracle.overrides or y in queried or y in chosen:
                        continue
                    chosen.add(y)
                    targets.append(y)
                    if len(targets) == budget:
                        return targets
        return targets

    return act


class _SpanTracker:
    """Incremental span of query points over F_p, with cheap access to the
    k smallest span elements by encoding.

    For p=2 the basis keeps distinct leading bits, so the subset-xors of
    the s lowest-pivot vectors are exactly the span elements below the
    next pivot; that yields the k smallest without materializing the span.
    """

    def __init__(self, g: GroupSpec):
        if g.kind != "vector":
            raise groups.GroupError("span tracking needs a vector-space domain")
        self.g = g
        self.basis: list[int] = []  # p=2: packed ints, distinct leading bits

    def add(self, x: int) -> None:
        g = self.g
        if g.p == 2:
            for b in self.basis:
                if (x ^ b) < x:
                    x ^= b
            if x:
                self.basis.append(x)
                self.basis.sort()
        else:
            if groups.rank_fp(g, self.basis + [x]) > len(self.basis):
                self.basis.append(x)

    def smallest(self, k: int) -> list[int]:
        g = self.g
        if g.p == 2:
            s = 0
            while s < len(self.basis) and (1 << s) < k:
                s += 1
            combos = [0]
            for b in self.basis[:s]:
                combos += [c ^ b for c in combos]
            return sorted(combos)[:k]
        size = g.p ** len(self.basis)
        if size > 1 << 16:
            raise ResourceLimitError("span too large to enumerate")
        span = {groups.identity(g)}
        for b in self.basis:
            new = set(span)
            for c in span:
                acc = c
                for _ in range(g.p - 1):
                    acc = groups.op(g, acc, b)
                    new.add(acc)
            span = new
        return sorted(span)[:k]


def strategy_span_eraser() -> Strategy:
    """Erase the span of the queries made so far, sparing the queries
    themselves, smallest encodings first."""

    def act(oracle: Oracle) -> list:
        tr = getattr(oracle, "_span_tracker", None)
        if tr is None:
            tr = oracle._span_tracker = _SpanTracker(oracle.domain)
        last_query = oracle.transcript.entries[-1][0]
        tr.add(last_query)
        budget = oracle.budget_available
        if budget == 0:
            return []
        queried = set(oracle.transcript.queries())
        # enough candidates to cover everything already skipped
        k = budget + len(queried) + len(oracle.overrides) + 1
        targets = []
        for y in tr.smallest(k):
            if y in oracle.overrides or y in queried:
                continue
            targets.append(y)
            if len(targets) == budget:
                break
        return targets

    return act


def strategy_uniform_corruptor(rng: Stream) -> Strategy:
    """Corrupt uniformly random points to a uniformly random different value."""

    def act(oracle: Oracle) -> list:
        want = min(oracle.budget_available, oracle.domain.order - len(oracle.overrides))
        h = oracle.codomain
        h_elems = list(groups.elements(h)) if h.order <= 1 << 16 else None
        targets = []
        picked = set()
        while len(targets) < want:
            x = groups.sample_uniform(oracle.domain, rng)
            if x in oracle.overrides or x in picked:
                continue
            cur = oracle.base(x)
            while True:
                v = groups.sample_uniform(h, rng)
                if v != cur:
                    break
            picked.add(x)
            targets.append((x, v))
        return targets

    return act


STRATEGIES = {
    "null": lambda rng, **kw: strategy_null(),
    "uniform": lambda rng, **kw: strategy_uniform_eraser(rng),
    "sum_hunter": lambda rng, w=3, **kw: strategy_sum_hunter(w),
    "span": lambda rng, **kw: strategy_span_eraser(),
    "uniform_corruptor": lambda rng, **kw: strategy_uniform_corruptor(rng),
}


def make_strategy(name: str, rng: Stream, **params) -> Strategy:
    try:
        factory = STRATEGIES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}") from None
    return factory(rng, **params)


# ---------------------------------------------------------------------------
# transcript distributions (lower-bound demos)


def transcript_distribution(
    policy: Callable[[list], Optional[int]],
    instance_sampler: Callable[[Stream], FunctionTable],
    strategy_factory: Callable[[Stream], Optional[Strategy]],
    trials: int,
    seed: int,
    mode: str = ERASURE,
    schedule: str = FIXED_RATE,
    t: int = 0,
) -> Counter:
    """Empirical distribution of the answer string a deterministic query
    policy sees, over sampled instances. policy(answers_so_far) returns
    the next query or None to stop."""
    from .rng import ROLE_ADVERSARY, ROLE_INSTANCE, stream

    counts: Counter = Counter()
    for trial in range(trials):
        inst = instance_sampler(stream(seed, trial, ROLE_INSTANCE))
        strat = strategy_factory(stream(seed, trial, ROLE_ADVERSARY))
        oracle = Oracle(inst, strat, mode=mode, schedule=schedule, t=t)
        answers: list = []
        while True:
            x = policy(answers)
            if x is None:
                break
            answers.append(oracle.query(x))
        counts[tuple("⊥" if a is BOTTOM else a for a in answers)] += 1
    return counts


def total_variation(d1: Counter, d2: Counter) -> float:
    n1 = sum(d1.values())
    n2 = sum(d2.values())
    keys = set(d1) | set(d2)
    return 0.5 * sum(abs(d1[k] / n1 - d2[k] / n2) for k in keys)
