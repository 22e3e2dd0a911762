"""Finite group arithmetic over compact integer encodings.

Every group element is a plain int. The encoding per kind:

* cyclic(n): the residue, in [0, n).
* vector(p, n): little-endian base-p digits, sum d_i * p**i. For p == 2
  this is the packed bitmask, so addition is XOR.
* symmetric(n): the permutation word w (w[i] = image of i) packed as
  little-endian base-n digits.
* dihedral(n): s * n + r for the transformation x -> r + (-1)**s * x on
  the n rotations, s in {0, 1}.
* product: mixed-radix over the component encoding bounds.

Elements carry no reference to their group; every operation takes the
GroupSpec explicitly. Two elements are equal iff their encodings are
equal. "a + b" for non-abelian groups means "apply a, then b"
(left-to-right composition), fixed globally.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .rng import Stream

PLUS = "+"
MINUS = "-"

SUBGROUP_CAP = 10**6
PARTIAL_SUMS_CAP = 24


class GroupError(ValueError):
    """Invalid element or operation for the given group."""


class ResourceLimitError(RuntimeError):
    """A materialization guard (closure size, subset-sum length) was hit."""


@dataclass(frozen=True)
class GroupSpec:
    kind: str  # cyclic | vector | symmetric | dihedral | product
    n: int = 0
    p: int = 0
    parts: tuple["GroupSpec", ...] = ()
    order: int = field(init=False, compare=False, default=0)
    abelian: bool = field(init=False, compare=False, default=True)

    def __post_init__(self):
        object.__setattr__(self, "order", _order(self))
        object.__setattr__(self, "abelian", _abelian(self))

    @property
    def encoding_bound(self) -> int:
        """Exclusive upper bound on element encodings (>= order)."""
        if self.kind == "cyclic":
            return self.n
        if self.kind == "vector":
            return self.p**self.n
        if self.kind == "symmetric":
            return self.n**self.n
        if self.kind == "dihedral":
            return 2 * self.n
        return math.prod(part.encoding_bound for part in self.parts)

    def __str__(self) -> str:
        return format_spec(self)


def _order(g: GroupSpec) -> int:
    if g.kind == "cyclic":
        return g.n
    if g.kind == "vector":
        return g.p**g.n
    if g.kind == "symmetric":
        return math.factorial(g.n)
    if g.kind == "dihedral":
        return 2 * g.n
    if g.kind == "product":
        return math.prod(part.order for part in g.parts)
    raise GroupError(f"unknown group kind {g.kind!r}")


def _abelian(g: GroupSpec) -> bool:
    if g.kind == "symmetric":
        return g.n < 3
    if g.kind == "dihedral":
        return g.n < 3
    if g.kind == "product":
        return all(part.abelian for part in g.parts)
    return True


def cyclic(n: int) -> GroupSpec:
    if n < 1:
        raise GroupError("cyclic group needs n >= 1")
    return GroupSpec("cyclic", n=n)


def vector_space(p: int, n: int) -> GroupSpec:
    if p < 2 or any(p % d == 0 for d in range(2, min(p, 38))):
        raise GroupError(f"{p} is not a small prime")
    if n < 1:
        raise GroupError("vector space needs n >= 1")
    return GroupSpec("vector", n=n, p=p)


def symmetric(n: int) -> GroupSpec:
    if not 1 <= n <= 12:
        raise GroupError("symmetric group supported for 1 <= n <= 12")
    return GroupSpec("symmetric", n=n)


def dihedral(n: int) -> GroupSpec:
    if n < 1:
        raise GroupError("dihedral group needs n >= 1")
    return GroupSpec("dihedral", n=n)


def product(parts: Sequence[GroupSpec]) -> GroupSpec:
    if len(parts) < 2:
        raise GroupError("direct product needs at least two factors")
    return GroupSpec("product", parts=tuple(parts))


_TOKEN_RE = re.compile(r"^(?:Z(\d+)|F(\d+)\^(\d+)|S(\d+)|D(\d+))$")


def parse_spec(text: str) -> GroupSpec:
    """Parse the compact config form: "Z6", "F2^16", "S5", "D4", "Z3xS3"."""
    tokens = text.strip().split("x")
    parts = []
    for tok in tokens:
        m = _TOKEN_RE.match(tok)
        if m is None:
            raise GroupError(f"cannot parse group spec {tok!r}")
        zn, fp, fn, sn, dn = m.groups()
        if zn is not None:
            parts.append(cyclic(int(zn)))
        elif fp is not None:
            parts.append(vector_space(int(fp), int(fn)))
        elif sn is not None:
            parts.append(symmetric(int(sn)))
        else:
            parts.append(dihedral(int(dn)))
    return parts[0] if len(parts) == 1 else product(parts)


def format_spec(g: GroupSpec) -> str:
    if g.kind == "cyclic":
        return f"Z{g.n}"
    if g.kind == "vector":
        return f"F{g.p}^{g.n}"
    if g.kind == "symmetric":
        return f"S{g.n}"
    if g.kind == "dihedral":
        return f"D{g.n}"
    return "x".join(format_spec(part) for part in g.parts)


# ---------------------------------------------------------------------------
# encoding helpers


def identity(g: GroupSpec) -> int:
    if g.kind == "symmetric":
        return encode_perm(g, tuple(range(g.n)))
    if g.kind == "product":
        return encode_product(g, [identity(part) for part in g.parts])
    return 0


def encode_vector(g: GroupSpec, digits: Sequence[int]) -> int:
    e = 0
    for d in reversed(digits):
        e = e * g.p + (d % g.p)
    return e


def decode_vector(g: GroupSpec, e: int) -> tuple[int, ...]:
    out = []
    for _ in range(g.n):
        out.append(e % g.p)
        e //= g.p
    return tuple(out)


def encode_perm(g: GroupSpec, word: Sequence[int]) -> int:
    if sorted(word) != list(range(g.n)):
        raise GroupError(f"{word!r} is not a permutation word of length {g.n}")
    e = 0
    for d in reversed(word):
        e = e * g.n + d
    return e


def decode_perm(g: GroupSpec, e: int) -> tuple[int, ...]:
    out = []
    for _ in range(g.n):
        out.append(e % g.n)
        e //= g.n
    return tuple(out)


def encode_product(g: GroupSpec, components: Sequence[int]) -> int:
    e = 0
    for part, c in zip(reversed(g.parts), reversed(list(components))):
        e = e * part.encoding_bound + c
    return e


def decode_product(g: GroupSpec, e: int) -> tuple[int, ...]:
    out = []
    for part in g.parts:
        out.append(e % part.encoding_bound)
        e //= part.encoding_bound
    return tuple(out)


def _check(g: GroupSpec, a: int) -> None:
    if not 0 <= a < g.encoding_bound:
        raise GroupError(f"encoding {a} out of range for {g}")


def element_text(g: GroupSpec, e: int) -> str:
    """Human-readable form used in transcripts and debug dumps."""
    _check(g, e)
    if g.kind == "cyclic":
        return str(e)
    if g.kind == "vector":
        return "(" + ",".join(map(str, decode_vector(g, e))) + ")"
    if g.kind == "symmetric":
        return "[" + " ".join(map(str, decode_perm(g, e))) + "]"
    if g.kind == "dihedral":
        r, s = e % g.n, e // g.n
        return f"sr{r}" if s else f"r{r}"
    comps = decode_product(g, e)
    return "(" + ",".join(element_text(part, c) for part, c in zip(g.parts, comps)) + ")"


# ---------------------------------------------------------------------------
# the group law


def op(g: GroupSpec, a: int, b: int) -> int:
    """The group operation; "apply a, then b" for non-abelian kinds."""
    _check(g, a)
    _check(g, b)
    return _op(g, a, b)


def _op(g: GroupSpec, a: int, b: int) -> int:
    kind = g.kind
    if kind == "cyclic":
        return (a + b) % g.n
    if kind == "vector":
        if g.p == 2:
            return a ^ b
        e, mul = 0, 1
        for _ in range(g.n):
            e += ((a + b) % g.p) * mul
            a //= g.p
            b //= g.p
            mul *= g.p
        return e
    if kind == "symmetric":
        wa = decode_perm(g, a)
        wb = decode_perm(g, b)
        return encode_perm(g, tuple(wb[wa[i]] for i in range(g.n)))
    if kind == "dihedral":
        n = g.n
        ra, sa = a % n, a // n
        rb, sb = b % n, b // n
        r = (rb - ra) % n if sb else (rb + ra) % n
        return (sa ^ sb) * n + r
    if kind == "product":
        return encode_product(
            g,
            [
                _op(part, ca, cb)
                for part, ca, cb in zip(g.parts, decode_product(g, a), decode_product(g, b))
            ],
        )
    raise GroupError(f"unknown group kind {kind!r}")


def inverse(g: GroupSpec, a: int) -> int:
    _check(g, a)
    return _inverse(g, a)


def _inverse(g: GroupSpec, a: int) -> int:
    kind = g.kind
    if kind == "cyclic":
        return (-a) % g.n
    if kind == "vector":
        if g.p == 2:
            return a
        e, mul = 0, 1
        for _ in range(g.n):
            e += ((-a) % g.p) * mul
            a //= g.p
            mul *= g.p
        return e
    if kind == "symmetric":
        w = decode_perm(g, a)
        inv = [0] * g.n
        for i, wi in enumerate(w):
            inv[wi] = i
        return encode_perm(g, tuple(inv))
    if kind == "dihedral":
        n = g.n
        r, s = a % n, a // n
        return a if s else ((-r) % n)
    if kind == "product":
        return encode_product(g, [_inverse(part, c) for part, c in zip(g.parts, decode_product(g, a))])
    raise GroupError(f"unknown group kind {kind!r}")


def signed_apply(g: GroupSpec, sign: str, a: int) -> int:
    """+a is a; -a is the inverse of a."""
    if sign == PLUS:
        return a
    if sign == MINUS:
        return inverse(g, a)
    raise GroupError(f"bad sign {sign!r}")


def coefficient_apply(g: GroupSpec, c: int, a: int) -> int:
    """Scalar multiplication in a prime-field vector space; c in [1, p-1]."""
    if g.kind != "vector":
        raise GroupError("coefficients only act on vector-space groups")
    if not 1 <= c <= g.p - 1:
        raise GroupError(f"coefficient {c} outside [1, {g.p - 1}]")
    _check(g, a)
    if g.p == 2:
        return a
    e, mul = 0, 1
    for _ in range(g.n):
        e += ((a % g.p) * c % g.p) * mul
        a //= g.p
        mul *= g.p
    return e


def entry_apply(g: GroupSpec, sign_or_coeff, a: int) -> int:
    """Apply a sign ('+'/'-') or an integer field coefficient to a."""
    if isinstance(sign_or_coeff, str):
        return signed_apply(g, sign_or_coeff, a)
    return coefficient_apply(g, sign_or_coeff, a)


def signed_sum(g: GroupSpec, entries: Sequence[tuple], direction: str = "increasing") -> int:
    """Fold (sign-or-coefficient, element) pairs in the given index order.

    Order matters in non-abelian groups: "increasing" composes entry 1
    through entry k left-to-right, "decreasing" composes k down to 1.
    The empty tuple sums to the identity.
    """
    if direction not in ("increasing", "decreasing"):
        raise GroupError(f"bad direction {direction!r}")
    seq = entries if direction == "increasing" else list(reversed(list(entries)))
    acc = identity(g)
    for s, x in seq:
        acc = _op(g, acc, entry_apply(g, s, x))
    return acc


# ---------------------------------------------------------------------------
# sampling


def sample_uniform(g: GroupSpec, rng: Stream) -> int:
    """Exactly uniform, rejection-free per kind (Fisher-Yates for S_n)."""
    kind = g.kind
    if kind == "cyclic":
        return rng.rand_below(g.n)
    if kind == "vector":
        if g.p == 2:
            return rng.next_u64() if g.n == 64 else rng.rand_below(1 << g.n)
        e, mul = 0, 1
        for _ in range(g.n):
            e += rng.rand_below(g.p) * mul
            mul *= g.p
        return e
    if kind == "symmetric":
        word = list(range(g.n))
        for i in range(g.n - 1):
            j = i + rng.rand_below(g.n - i)
            word[i], word[j] = word[j], word[i]
        return encode_perm(g, tuple(word))
    if kind == "dihedral":
        r = rng.rand_below(g.n)
        s = rng.rand_below(2)
        return s * g.n + r
    if kind == "product":
        return encode_product(g, [sample_uniform(part, rng) for part in g.parts])
    raise GroupError(f"unknown group kind {kind!r}")


def elements(g: GroupSpec) -> Iterator[int]:
    """All elements in canonical (ascending encoding) order; small groups only."""
    if g.order > SUBGROUP_CAP:
        raise ResourceLimitError(f"refusing to enumerate {g} with order {g.order}")
    kind = g.kind
    if kind in ("cyclic", "dihedral"):
        yield from range(g.order)
    elif kind == "vector":
        yield from range(g.p**g.n)
    elif kind == "symmetric":
        encs = sorted(encode_perm(g, w) for w in itertools.permutations(range(g.n)))
        yield from encs
    else:
        combos = itertools.product(*[list(elements(part)) for part in g.parts])
        yield from sorted(encode_product(g, c) for c in combos)


# ---------------------------------------------------------------------------
# generation


def generated_subgroup(g: GroupSpec, s: Iterable[int], cap: int = SUBGROUP_CAP) -> frozenset[int]:
    """Closure of S (plus identity) under the group law and inverses."""
    gens = set()
    for x in s:
        _check(g, x)
        gens.add(x)
        gens.add(_inverse(g, x))
    e = identity(g)
    known = {e}
    frontier = [e]
    while frontier:
        nxt = []
        for x in frontier:
            for gen in gens:
                y = _op(g, x, gen)
                if y not in known:
                    known.add(y)
                    if len(known) > cap:
                        raise ResourceLimitError(f"subgroup closure exceeded cap {cap}")
                    nxt.append(y)
        frontier = nxt
    return frozenset(known)


def rank_fp(g: GroupSpec, vectors: Iterable[int]) -> int:
    """Rank over F_p of vector-space encodings (Gaussian elimination)."""
    if g.kind != "vector":
        raise GroupError("rank is only defined for vector-space groups")
    if g.p == 2:
        basis: list[int] = []
        for v in vectors:
            for b in basis:
                v = min(v, v ^ b)
            if v:
                basis.append(v)
                basis.sort(reverse=True)
        return len(basis)
    rows: list[tuple[int, ...]] = []
    pivots: list[int] = []
    p = g.p
    for v in vectors:
        digits = list(decode_vector(g, v))
        for row, piv in zip(rows, pivots):
            c = digits[piv]
            if c:
                inv_lead = pow(row[piv], -1, p)
                f = c * inv_lead % p
                digits = [(d - f * r) % p for d, r in zip(digits, row)]
        lead = next((i for i, d in enumerate(digits) if d), None)
        if lead is not None:
            rows.append(tuple(digits))
            pivots.append(lead)
    return len(rows)


def generates(g: GroupSpec, s: Iterable[int], cap: int = SUBGROUP_CAP) -> bool:
    """True iff <S> = G; uses rank for vector spaces, closure otherwise."""
    s = list(s)
    if g.kind == "vector":
        return rank_fp(g, s) == g.n
    try:
        return len(generated_subgroup(g, s, cap=cap)) == g.order
    except ResourceLimitError:
        raise


def partial_sums(g: GroupSpec, s: Sequence[int], cap: int = PARTIAL_SUMS_CAP) -> frozenset[int]:
    """All subset sums of s taken in increasing index order (incl. identity)."""
    if len(s) > cap:
        raise ResourceLimitError(f"partial_sums over {len(s)} elements exceeds cap {cap}")
    sums = {identity(g)}
    for x in s:
        _check(g, x)
        sums |= {_op(g, acc, x) for acc in sums}
    return frozenset(sums)


# ---------------------------------------------------------------------------
# E(G) estimation


@dataclass
class GeneratorStats:
    group: GroupSpec
    e_estimate: float
    e_std_error: float
    trials: int
    d_beta_estimates: dict[float, int]
    stopping_counts: list[int] = field(repr=False, default_factory=list)


class _IncrementalGeneration:
    """Tracks whether the elements seen so far generate G, incrementally."""

    def __init__(self, g: GroupSpec):
        self.g = g
        if g.kind == "vector":
            self._basis: list[int] = []
            self._rows: list[tuple[int, ...]] = []
            self._pivots: list[int] = []
        else:
            self._known = {identity(g)}
            self._gens: set[int] = set()

    def add(self, x: int) -> bool:
        """Add one element; return True once the set generates G."""
        g = self.g
        if g.kind == "vector":
            if g.p == 2:
                for b in self._basis:
                    x = min(x, x ^ b)
                if x:
                    self._basis.append(x)
                return len(self._basis) == g.n
            digits = list(decode_vector(g, x))
            p = g.p
            for row, piv in zip(self._rows, self._pivots):
                c = digits[piv]
                if c:
                    f = c * pow(row[piv], -1, p) % p
                    digits = [(d - f * r) % p for d, r in zip(digits, row)]
            lead = next((i for i, d in enumerate(digits) if d), None)
            if lead is not None:
                self._rows.append(tuple(digits))
                self._pivots.append(lead)
            return len(self._rows) == g.n
        if x not in self._known:
            self._gens.add(x)
            self._gens.add(_inverse(g, x))
            frontier = list(self._known)
            while frontier:
                nxt = []
                for y in frontier:
                    for gen in self._gens:
                        z = _op(g, y, gen)
                        if z not in self._known:
                            self._known.add(z)
                            nxt.append(z)
                frontier = nxt
        return len(self._known) == self.g.order


def estimate_E(
    g: GroupSpec,
    trials: int,
    rng: Stream,
    betas: Sequence[float] = (),
    max_draws: int = 10_000,
) -> GeneratorStats:
    """Monte-Carlo estimate of the expected samples needed to generate G.

    Also records, for each requested beta, the smallest m whose empirical
    generation frequency over the trial budget is >= 1 - beta.
    """
    counts = []
    for _ in range(trials):
        tracker = _IncrementalGeneration(g)
        draws = 0
        while True:
            draws += 1
            if draws > max_draws:
                raise ResourceLimitError(f"did not generate {g} within {max_draws} draws")
            if tracker.add(sample_uniform(g, rng)):
                break
        counts.append(draws)
    mean = sum(counts) / trials
    var = sum((c - mean) ** 2 for c in counts) / max(trials - 1, 1)
    d_beta: dict[float, int] = {}
    if betas:
        ordered = sorted(counts)
        for beta in betas:
            # smallest m with success frequency >= 1 - beta
            need = math.ceil((1 - beta) * trials)
            d_beta[beta] = ordered[min(need, trials) - 1]
    return GeneratorStats(
        group=g,
        e_estimate=mean,
        e_std_error=math.sqrt(var / trials),
        trials=trials,
        d_beta_estimates=d_beta,
        stopping_counts=counts,
    )
