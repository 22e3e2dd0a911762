"""Backend selection for batch experiments.

The compiled extension runs whole batches of tester trials in C; this
module decides per batch whether the extension can handle the
configuration and otherwise replays the same trials on the pure-Python
reference path. Both paths consume identical RNG streams, so a batch
gives bit-identical verdicts regardless of backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import groups
from .functions import FunctionTable
from .groups import GroupSpec
from .oracle import ERASURE, FIXED_RATE, Oracle, make_strategy
from .rng import ROLE_ADVERSARY, ROLE_TESTER, stream
from .testers import (
    DEFAULT_REPS,
    TesterParams,
    TesterError,
    default_gr_sample_count,
    m_for_online_test,
    run_named,
)

try:
    from . import _engine

    HAVE_EXT = True
except ImportError:  # pragma: no cover - depends on the build
    _engine = None
    HAVE_EXT = False

# op/inv tables are order^2; keep them modest
_TABLE_CAP = 2048
_SYM_ENC_CAP = 8  # n^n lookup array


@dataclass
class BatchResult:
    verdicts: np.ndarray  # uint8, 1 = accept
    queries: np.ndarray   # int32, queries made per trial
    erasures: np.ndarray  # int32, bottoms seen per trial
    backend: str

    @property
    def accepted(self) -> int:
        return int(self.verdicts.sum())

    @property
    def trials(self) -> int:
        return len(self.verdicts)


def _representable(g: GroupSpec) -> bool:
    if g.kind == "vector" and g.p == 2:
        return g.n <= 20
    if g.kind == "product":
        return False
    if g.kind == "symmetric" and g.n > _SYM_ENC_CAP:
        return False
    return g.order <= _TABLE_CAP


@lru_cache(maxsize=None)
def _cgroup(g: GroupSpec):
    if g.kind == "vector" and g.p == 2:
        return _engine.CGroup(_engine.GROUP_KINDS["xor"], g.order, g.n, 2, 0)
    elems = list(groups.elements(g))
    idx = {e: i for i, e in enumerate(elems)}
    order = g.order
    op_t = np.empty((order, order), dtype=np.int32)
    inv_t = np.empty(order, dtype=np.int32)
    for i, a in enumerate(elems):
        inv_t[i] = idx[groups.inverse(g, a)]
        for j, b in enumerate(elems):
            op_t[i, j] = idx[groups.op(g, a, b)]
    ident = idx[groups.identity(g)]
    if g.kind == "cyclic":
        return _engine.CGroup(_engine.GROUP_KINDS["cyclic"], order, 0, 0, ident, op_t, inv_t)
    if g.kind == "vector":
        return _engine.CGroup(_engine.GROUP_KINDS["vecp"], order, g.n, g.p, ident, op_t, inv_t)
    if g.kind == "dihedral":
        return _engine.CGroup(_engine.GROUP_KINDS["dih"], order, g.n, 0, ident, op_t, inv_t)
    if g.kind == "symmetric":
        enc2idx = np.zeros(g.n ** g.n, dtype=np.int32)
        for e, i in idx.items():
            enc2idx[e] = i
        return _engine.CGroup(
            _engine.GROUP_KINDS["sym"], order, g.n, 0, ident, op_t, inv_t, enc2idx
        )
    raise ValueError(f"unsupported group kind {g.kind!r}")


def _index_values(inst: FunctionTable) -> np.ndarray:
    g, h = inst.domain, inst.codomain
    h_idx = {e: i for i, e in enumerate(groups.elements(h))}
    return np.fromiter(
        (h_idx[inst(x)] for x in groups.elements(g)), dtype=np.int32, count=g.order
    )


def resolve_plan(name: str, g: GroupSpec, h: GroupSpec, params: TesterParams):
    """Map a registry tester name to a concrete compiled kernel and its
    integer parameters, mirroring the pure-path defaulting rules."""
    eps = params.epsilon
    checks = math.ceil(3 / float(eps))
    if name == "dispatch-general":
        m = m_for_online_test(params.t, eps, base=2)
        if 2 ** (4 * m) <= g.order:
            return "online-signs", {"m": m, "reps": DEFAULT_REPS}
        return "gr-sample", {
            "sample_count": default_gr_sample_count(g.order),
            "checks": checks,
        }
    if name == "dispatch-prime":
        if g.kind != "vector" or h.kind != "vector" or g.p != h.p:
            raise TesterError("dispatch-prime needs matching vector spaces")
        m = m_for_online_test(params.t, eps, base=g.p)
        if m <= g.n / 4:
            return "online-coeffs", {"m": m, "reps": DEFAULT_REPS}
        e = params.e_of_g if params.e_of_g is not None else g.n + 3
        return "generated-subgroup", {"m": math.ceil(e) + 9, "checks": checks}
    if name in ("signs", "coeffs"):
        return name, {"k": params.k}
    if name == "fixed-signs":
        signs = params.signs if params.signs is not None else [groups.PLUS] * params.k
        if len(signs) != params.k:
            raise TesterError("need exactly k signs")
        return name, {
            "k": params.k,
            "signs": np.array([0 if s == groups.PLUS else 1 for s in signs], dtype=np.int32),
        }
    if name in ("unpredictable-signs", "unpredictable-coeffs"):
        if params.m % 2:
            raise TesterError("m must be even")
        return name, {"m": params.m}
    if name in ("online-signs", "online-coeffs"):
        base = 2 if name == "online-signs" else g.p
        m = params.force_m if params.force_m is not None else m_for_online_test(params.t, eps, base=base)
        reps = params.force_reps if params.force_reps is not None else DEFAULT_REPS
        if m % 2:
            raise TesterError("m must be even")
        return name, {"m": m, "reps": reps}
    if name == "gr-sample":
        s = (
            params.force_sample_count
            if params.force_sample_count is not None
            else default_gr_sample_count(g.order)
        )
        return name, {"sample_count": s, "checks": checks}
    if name == "generated-subgroup":
        if params.e_of_g is None:
            raise TesterError("generated-subgroup needs e_of_g")
        return name, {"m": math.ceil(params.e_of_g) + 9, "checks": checks}
    if name == "zero":
        return name, {"checks": checks}
    raise TesterError(f"unknown tester {name!r}")


def _max_queries(kernel: str, cparams: dict) -> int:
    if kernel in ("signs", "fixed-signs", "coeffs"):
        return cparams["k"] + 1
    if kernel.startswith("unpredictable"):
        return cparams["m"] + 1
    if kernel.startswith("online"):
        return (cparams["m"] + 1) * cparams["reps"]
    if kernel == "gr-sample":
        return cparams["sample_count"] + cparams["checks"]
    if kernel == "generated-subgroup":
        return cparams["m"] + cparams["checks"]
    return cparams["checks"]


def compiled_eligible(
    inst: FunctionTable,
    tester: str,
    params: TesterParams,
    strategy_name: str,
    strategy_params: dict,
    mode: str,
    t: int,
) -> bool:
    if not HAVE_EXT or mode != ERASURE:
        return False
    if inst.values is None:  # implicit instances stay on the Python path
        return False
    g, h = inst.domain, inst.codomain
    if not _representable(g) or not _representable(h) or not h.abelian:
        return False
    if strategy_name not in _engine.STRATEGY_CODES:
        return False
    if strategy_name == "span" and g.kind != "vector":
        return False
    if strategy_params.get("w", 3) > 16:
        return False
    try:
        kernel, cparams = resolve_plan(tester, g, h, params)
    except TesterError:
        return False
    maxq = _max_queries(kernel, cparams)
    if maxq > _engine.MAX_QUERIES:
        return False
    if cparams.get("k", 0) > _engine.MAX_TUPLE or cparams.get("m", 0) > _engine.MAX_TUPLE:
        return False
    if kernel in ("gr-sample", "generated-subgroup"):
        limit = _engine.MAX_SAMPLES
        if cparams.get("sample_count", 0) > limit or cparams.get("m", 0) > limit:
            return False
    if strategy_name == "span":
        # candidate list must hold budget + queried + erased + 1 entries
        worst = t * maxq + 2 * maxq + 1
        if worst > _engine.MAX_CAND:
            return False
        if g.p > 2 and g.order > _engine.MAX_CAND:
            return False
    return True


def _run_python(inst, tester, params, strategy_name, strategy_params, mode, schedule, t, trials, seed):
    verdicts = np.zeros(trials, dtype=np.uint8)
    queries = np.zeros(trials, dtype=np.int32)
    erasures = np.zeros(trials, dtype=np.int32)
    for trial in range(trials):
        strat = make_strategy(strategy_name, stream(seed, trial, ROLE_ADVERSARY), **strategy_params)
        oracle = Oracle(inst, strat, mode=mode, schedule=schedule, t=t)
        v = run_named(tester, oracle, params, stream(seed, trial, ROLE_TESTER))
        verdicts[trial] = 1 if v.accepted else 0
        queries[trial] = v.queries_made
        erasures[trial] = v.erasures_seen
    return BatchResult(verdicts, queries, erasures, backend="python")


def run_batch(
    inst: FunctionTable,
    tester: str,
    params: TesterParams,
    strategy_name: str = "null",
    strategy_params: Optional[dict] = None,
    mode: str = ERASURE,
    schedule: str = FIXED_RATE,
    t: int = 0,
    trials: int = 1000,
    seed: int = 0,
    backend: str = "auto",
) -> BatchResult:
    """Run `trials` independent trials of one tester on one instance.

    Every trial uses its own derived tester and adversary streams, so the
    result does not depend on the backend or on batch boundaries.
    """
    strategy_params = strategy_params or {}
    eligible = compiled_eligible(inst, tester, params, strategy_name, strategy_params, mode, t)
    if backend == "compiled" and not eligible:
        raise TesterError("configuration not supported by the compiled backend")
    if backend == "python" or not eligible:
        return _run_python(
            inst, tester, params, strategy_name, strategy_params, mode, schedule, t, trials, seed
        )
    g, h = inst.domain, inst.codomain
    kernel, cparams = resolve_plan(tester, g, h, params)
    try:
        verdicts, queries, erasures = _engine.run_batch(
            _cgroup(g),
            _cgroup(h),
            _index_values(inst),
            _engine.TESTER_CODES[kernel],
            cparams,
            _engine.STRATEGY_CODES[strategy_name],
            strategy_params.get("w", 3),
            0 if schedule == FIXED_RATE else 1,
            t,
            trials,
            seed,
        )
    except RuntimeError:
        # a trial blew past a compiled-path limit; replay in Python
        return _run_python(
            inst, tester, params, strategy_name, strategy_params, mode, schedule, t, trials, seed
        )
    return BatchResult(verdicts, queries, erasures, backend="compiled")
