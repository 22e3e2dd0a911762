"""Functions f: G -> H, homomorphism enumeration, and test-instance generators.

Small functions are dense slot arrays indexed by element encoding. Large
vector-space domains use an implicit representation: a base homomorphism
plus keyed pseudorandom noise, so f is evaluable at |G| = 2**64 without
materializing anything.
"""

from __future__ import annotations

import itertools
import json
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import groups
from .groups import GroupSpec, ResourceLimitError
from .rng import MASK64, _GAMMA, Stream, _mix, derive_seed

DENSE_CAP = 1 << 20
ENUM_GUARD = 10**6


class FunctionError(ValueError):
    pass


def _element_list(g: GroupSpec) -> list[int]:
    return list(groups.elements(g))


def _contiguous(g: GroupSpec) -> bool:
    # encodings form [0, order) exactly for these kinds
    return g.kind in ("cyclic", "vector", "dihedral")


@dataclass(frozen=True)
class Homomorphism:
    """A verified homomorphism, as a dense slot table or basis images.

    basis_images[i] is the image of the i-th standard basis vector of a
    vector-space domain; for other domains the dense table is used.
    """

    domain: GroupSpec
    codomain: GroupSpec
    table: Optional[tuple[int, ...]] = None
    basis_images: Optional[tuple[int, ...]] = None

    def __call__(self, x: int) -> int:
        if self.table is not None:
            return self.table[x]
        acc = groups.identity(self.codomain)
        img = self.basis_images
        if self.domain.p == 2:
            i = 0
            while x:
                if x & 1:
                    acc = groups.op(self.codomain, acc, img[i])
                x >>= 1
                i += 1
            return acc
        for i, d in enumerate(groups.decode_vector(self.domain, x)):
            for _ in range(d):
                acc = groups.op(self.codomain, acc, img[i])
        return acc

    def as_table(self) -> "FunctionTable":
        if self.table is not None:
            values = list(self.table)
        else:
            if self.domain.order > DENSE_CAP:
                raise ResourceLimitError("domain too large for a dense table")
            values = [0] * self.domain.encoding_bound
            for x in _element_list(self.domain):
                values[x] = self(x)
        return FunctionTable(
            domain=self.domain,
            codomain=self.codomain,
            values=values,
            certified_distance=Fraction(0),
        )


def _check_hom_exhaustive(h: Homomorphism) -> None:
    g = h.domain
    for a in groups.elements(g):
        for b in groups.elements(g):
            if h(groups.op(g, a, b)) != groups.op(h.codomain, h(a), h(b)):
                raise FunctionError("not a homomorphism")


def _check_hom_sampled(h: Homomorphism, pairs: int = 1000) -> None:
    rng = Stream(derive_seed(0x686F6D, *h.basis_images))
    g = h.domain
    for _ in range(pairs):
        a = groups.sample_uniform(g, rng)
        b = groups.sample_uniform(g, rng)
        if h(groups.op(g, a, b)) != groups.op(h.codomain, h(a), h(b)):
            raise FunctionError("not a homomorphism")


def hom_from_basis_images(domain: GroupSpec, codomain: GroupSpec, images) -> Homomorphism:
    if domain.kind != "vector":
        raise FunctionError("basis-image homomorphisms need a vector-space domain")
    h = Homomorphism(domain, codomain, basis_images=tuple(images))
    if domain.order <= 4096 and codomain.order <= 64:
        _check_hom_exhaustive(h)
    else:
        _check_hom_sampled(h)
    return h


def p_torsion(h_group: GroupSpec, p: int) -> list[int]:
    """Elements of order dividing p, in canonical order (small groups)."""
    out = []
    e = groups.identity(h_group)
    for a in groups.elements(h_group):
        acc = e
        for _ in range(p):
            acc = groups.op(h_group, acc, a)
        if acc == e:
            out.append(a)
    return out


def generating_sequence(g: GroupSpec) -> list[int]:
    """Greedy: append the first canonical element outside the current closure."""
    gens: list[int] = []
    closure = frozenset([groups.identity(g)])
    for a in groups.elements(g):
        if a not in closure:
            gens.append(a)
            closure = groups.generated_subgroup(g, gens)
            if len(closure) == g.order:
                break
    return gens


def enumerate_homomorphisms(G: GroupSpec, H: GroupSpec) -> list[Homomorphism]:
    """All of HOM(G, H), as dense verified homomorphisms.

    Assign codomain images to a fixed generating sequence and extend each
    assignment along the Cayley graph, discarding inconsistent or partial
    extensions.
    """
    gens = generating_sequence(G)
    d = max(len(gens), 1)
    if H.order**d > ENUM_GUARD or G.order > DENSE_CAP:
        raise ResourceLimitError(f"HOM({G},{H}) enumeration guard exceeded ({H.order}^{d})")
    h_elems = _element_list(H)
    g_identity = groups.identity(G)
    h_identity = groups.identity(H)
    out = []
    for assignment in itertools.product(h_elems, repeat=len(gens)):
        edges = []
        for x, v in zip(gens, assignment):
            edges.append((x, v))
            edges.append((groups.inverse(G, x), groups.inverse(H, v)))
        table: dict[int, int] = {g_identity: h_identity}
        frontier = [g_identity]
        ok = True
        while frontier and ok:
            nxt = []
            for x in frontier:
                vx = table[x]
                for ge, gv in edges:
                    y = groups.op(G, x, ge)
                    vy = groups.op(H, vx, gv)
                    known = table.get(y)
                    if known is None:
                        table[y] = vy
                        nxt.append(y)
                    elif known != vy:
                        ok = False
                        break
                if not ok:
                    break
            frontier = nxt
        if not ok or len(table) != G.order:
            continue
        dense = [0] * G.encoding_bound
        for x, v in table.items():
            dense[x] = v
        out.append(Homomorphism(G, H, table=tuple(dense)))
    return out


@dataclass
class FunctionTable:
    """f: G -> H, dense (slot array by encoding) or implicit (hom + noise).

    Implicit evaluation: a keyed hash of x opens a noise gate with
    probability noise_threshold / 2**64; when open, f(x) is the base value
    shifted by a pseudorandom non-identity codomain element. Stateless and
    repeatable given the key.
    """

    domain: GroupSpec
    codomain: GroupSpec
    values: Optional[list[int]] = None
    base: Optional[Homomorphism] = None
    noise_key: int = 0
    noise_threshold: int = 0
    certified_distance: Optional[Fraction] = None
    planted_rate: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if self.values is None:
            if self.base is None:
                raise FunctionError("need a dense table or a base homomorphism")
            if not _contiguous(self.codomain):
                raise FunctionError("implicit noise needs contiguous codomain encodings")
        elif self.domain.order > DENSE_CAP:
            raise ResourceLimitError("dense table over the size cap")

    @property
    def implicit(self) -> bool:
        return self.values is None

    @property
    def noise_rate(self) -> float:
        return self.noise_threshold / 2.0**64

    def __call__(self, x: int) -> int:
        if self.values is not None:
            return self.values[x]
        v = self.base(x)
        hx = _mix((x ^ self.noise_key) & MASK64)
        if _mix(hx) < self.noise_threshold:
            shift = 1 + _mix((hx + _GAMMA) & MASK64) % (self.codomain.order - 1)
            v = groups.op(self.codomain, v, shift)
        return v


def distance(f: FunctionTable, g: FunctionTable) -> Fraction:
    """Exact fraction of disagreeing points (dense only)."""
    if f.implicit or g.implicit:
        raise FunctionError("exact distance needs dense tables")
    if (f.domain, f.codomain) != (g.domain, g.codomain):
        raise FunctionError("mismatched domains")
    diff = sum(1 for x in groups.elements(f.domain) if f.values[x] != g.values[x])
    return Fraction(diff, f.domain.order)


def distance_to_table(f: FunctionTable, h: Homomorphism) -> Fraction:
    diff = sum(1 for x in groups.elements(f.domain) if f.values[x] != h.table[x])
    return Fraction(diff, f.domain.order)


def distance_to_hom(f: FunctionTable) -> tuple[Fraction, Homomorphism]:
    """Exact distance to the nearest homomorphism plus one witness minimizer."""
    if f.implicit:
        raise FunctionError("exact distance needs a dense table")
    homs = enumerate_homomorphisms(f.domain, f.codomain)
    best = None
    best_h = None
    for h in homs:
        d = distance_to_table(f, h)
        if best is None or d < best:
            best, best_h = d, h
    return best, best_h


def random_hom(G: GroupSpec, H: GroupSpec, rng: Stream) -> Homomorphism:
    """Uniform over HOM(G, H); basis-image sampling when the domain is a
    vector space over F_p (images drawn from the p-torsion of H), full
    enumeration otherwise."""
    if G.kind == "vector":
        if H.kind == "vector" and H.p == G.p:
            images = [groups.sample_uniform(H, rng) for _ in range(G.n)]
            return hom_from_basis_images(G, H, images)
        if H.abelian and H.order <= DENSE_CAP:
            tor = p_torsion(H, G.p)
            images = [tor[rng.rand_below(len(tor))] for _ in range(G.n)]
            return hom_from_basis_images(G, H, images)
    homs = enumerate_homomorphisms(G, H)
    return homs[rng.rand_below(len(homs))]


def _random_different(H: GroupSpec, current: int, h_elems: list[int], index_of: dict[int, int], rng: Stream) -> int:
    i = rng.rand_below(len(h_elems) - 1)
    if i >= index_of[current]:
        i += 1
    return h_elems[i]


def gen_instance(kind: str, G: GroupSpec, H: GroupSpec, rng: Stream, **params) -> FunctionTable:
    """Test-instance generators.

    kinds: random_hom | shifted_hom(shift) | random_function |
    planted_far(epsilon) | implicit_planted(epsilon, key)
    """
    if kind == "random_hom":
        h = random_hom(G, H, rng)
        if G.order <= DENSE_CAP:
            t = h.as_table()
            t.label = "random_hom"
            return t
        return FunctionTable(G, H, base=h, certified_distance=Fraction(0), label="random_hom")

    if kind == "shifted_hom":
        s = params["shift"]
        h = random_hom(G, H, rng)
        values = [0] * G.encoding_bound
        for x in groups.elements(G):
            values[x] = groups.op(H, h.table[x] if h.table else h(x), s)
        return FunctionTable(G, H, values=values, label="shifted_hom")

    if kind == "random_function":
        values = [0] * G.encoding_bound
        for x in groups.elements(G):
            values[x] = groups.sample_uniform(H, rng)
        return FunctionTable(G, H, values=values, label="random_function")

    if kind == "planted_far":
        eps = params["epsilon"]
        h = random_hom(G, H, rng)
        base = h.as_table()
        flips = _ceil_frac(eps, G.order)
        g_elems = _element_list(G)
        # partial Fisher-Yates: uniform subset of exactly `flips` points
        pool = list(g_elems)
        for i in range(flips):
            j = i + rng.rand_below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        h_elems = _element_list(H)
        index_of = {e: i for i, e in enumerate(h_elems)}
        values = list(base.values)
        for x in pool[:flips]:
            values[x] = _random_different(H, values[x], h_elems, index_of, rng)
        out = FunctionTable(G, H, values=values, planted_rate=flips / G.order, label="planted_far")
        try:
            out.certified_distance, _ = distance_to_hom(out)
        except ResourceLimitError:
            out.certified_distance = None
        return out

    if kind == "implicit_planted":
        eps = params["epsilon"]
        key = params.get("key")
        if key is None:
            key = rng.next_u64()
        h = random_hom(G, H, rng)
        return FunctionTable(
            G,
            H,
            base=h,
            noise_key=key,
            noise_threshold=min(round(float(eps) * 2.0**64), (1 << 64) - 1),
            planted_rate=float(eps),
            label="implicit_planted",
        )

    raise FunctionError(f"unknown instance kind {kind!r}")


def _ceil_frac(eps, n: int) -> int:
    f = Fraction(eps).limit_denominator(10**9) if not isinstance(eps, Fraction) else eps
    return -((-f.numerator * n) // f.denominator)


# ---------------------------------------------------------------------------
# serialization

_MAGIC = b"HTFT"


def to_bytes(f: FunctionTable) -> bytes:
    if f.implicit:
        raise FunctionError("only dense tables serialize to the binary form")
    dom = str(f.domain).encode()
    cod = str(f.codomain).encode()
    out = [_MAGIC, struct.pack("<HHQ", len(dom), len(cod), f.domain.order), dom, cod]
    for x in groups.elements(f.domain):
        out.append(struct.pack("<I", f.values[x]))
    return b"".join(out)


def from_bytes(raw: bytes) -> FunctionTable:
    if raw[:4] != _MAGIC:
        raise FunctionError("bad magic")
    dlen, clen, order = struct.unpack_from("<HHQ", raw, 4)
    off = 16
    G = groups.parse_spec(raw[off : off + dlen].decode())
    off += dlen
    H = groups.parse_spec(raw[off : off + clen].decode())
    off += clen
    if order != G.order:
        raise FunctionError("order mismatch in header")
    values = [0] * G.encoding_bound
    for x in groups.elements(G):
        (values[x],) = struct.unpack_from("<I", raw, off)
        off += 4
    return FunctionTable(G, H, values=values)


def to_json(f: FunctionTable) -> str:
    """Debug form, small domains only."""
    if f.implicit or f.domain.order > 256:
        raise FunctionError("json form is for dense tables with |G| <= 256")
    return json.dumps(
        {
            "domain": str(f.domain),
            "codomain": str(f.codomain),
            "values": [f.values[x] for x in groups.elements(f.domain)],
        }
    )


def from_json(text: str) -> FunctionTable:
    obj = json.loads(text)
    G = groups.parse_spec(obj["domain"])
    H = groups.parse_spec(obj["codomain"])
    values = [0] * G.encoding_bound
    for x, v in zip(groups.elements(G), obj["values"]):
        values[x] = v
    return FunctionTable(G, H, values=values)
