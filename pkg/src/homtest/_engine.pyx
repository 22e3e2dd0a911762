# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch runner for the testers.

Mirrors the pure-Python modules draw-for-draw on the same SplitMix64
streams: given identical (seed, instance, strategy, tester) a batch here
returns exactly the verdicts the Python reference produces, only faster.
The equivalence tests enforce this bit-for-bit.

Scope: dense instances in index space (elements 0..|G|-1 in canonical
order), erasure adversaries, abelian codomains. Implicit functions and
corruption mode stay on the Python path.
"""

from libc.stdint cimport uint64_t, int64_t, int32_t, uint8_t
from libc.stdlib cimport qsort

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15UL


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9UL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBUL
    return z ^ (z >> 31)


cdef uint64_t derive3(uint64_t seed, uint64_t a, uint64_t b) nogil:
    cdef uint64_t s = mix64(seed)
    s = mix64((s ^ a) + GAMMA)
    s = mix64((s ^ b) + GAMMA)
    return s


cdef struct Rng:
    uint64_t state


cdef inline uint64_t next_u64(Rng* r) nogil:
    r.state += GAMMA
    return mix64(r.state)


cdef inline uint64_t rand_below(Rng* r, uint64_t n) nogil:
    # same rejection rule as the Python Stream.rand_below: reject the top
    # (2**64 mod n) values
    cdef uint64_t rem = (0UL - n) % n
    cdef uint64_t threshold = 0UL - rem
    cdef uint64_t v
    while True:
        v = next_u64(r)
        if rem == 0 or v < threshold:
            return v % n


# group kinds
cdef enum:
    K_CYCLIC = 0
    K_XOR = 1
    K_VECP = 2
    K_SYM = 3
    K_DIH = 4

# tester codes
cdef enum:
    T_SIGNS = 0
    T_FIXED_SIGNS = 1
    T_COEFFS = 2
    T_UNPRED_SIGNS = 3
    T_UNPRED_COEFFS = 4
    T_ONLINE_SIGNS = 5
    T_ONLINE_COEFFS = 6
    T_GR = 7
    T_GENSUB = 8
    T_ZERO = 9

# strategy codes
cdef enum:
    S_NULL = 0
    S_UNIFORM = 1
    S_SUM_HUNTER = 2
    S_SPAN = 3

GROUP_KINDS = {"cyclic": K_CYCLIC, "xor": K_XOR, "vecp": K_VECP,
               "sym": K_SYM, "dih": K_DIH}
TESTER_CODES = {"signs": T_SIGNS, "fixed-signs": T_FIXED_SIGNS,
                "coeffs": T_COEFFS, "unpredictable-signs": T_UNPRED_SIGNS,
                "unpredictable-coeffs": T_UNPRED_COEFFS,
                "online-signs": T_ONLINE_SIGNS,
                "online-coeffs": T_ONLINE_COEFFS, "gr-sample": T_GR,
                "generated-subgroup": T_GENSUB, "zero": T_ZERO}
STRATEGY_CODES = {"null": S_NULL, "uniform": S_UNIFORM,
                  "sum_hunter": S_SUM_HUNTER, "span": S_SPAN}

# hard limits of the compiled path; the driver falls back to Python
# whenever a batch could exceed them
MAX_QUERIES = 16384
MAX_TUPLE = 512
MAX_SAMPLES = 256
MAX_CAND = 8192
MAX_ORDER = 1 << 20

DEF C_MAXQ = 16384
DEF C_MAXTUP = 512
DEF C_MAXSAMP = 256
DEF C_MAXCAND = 8192
DEF C_MAXBASIS = 16384  # single-pass reduction can append once per add
DEF C_RANKROWS = 64     # fully reduced rows in the rank/extender helpers


cdef class CGroup:
    cdef public int kind
    cdef public long long order
    cdef public int n
    cdef public int p
    cdef public long long identity
    cdef int32_t[:, ::1] op_t
    cdef int32_t[::1] inv_t
    cdef int32_t[::1] enc2idx

    def __init__(self, kind, order, n, p, identity, op_t=None, inv_t=None, enc2idx=None):
        self.kind = kind
        self.order = order
        self.n = n
        self.p = p
        self.identity = identity
        if op_t is not None:
            self.op_t = np.ascontiguousarray(op_t, dtype=np.int32)
            self.inv_t = np.ascontiguousarray(inv_t, dtype=np.int32)
        if enc2idx is not None:
            self.enc2idx = np.ascontiguousarray(enc2idx, dtype=np.int32)


cdef inline int64_t gop(CGroup g, int64_t a, int64_t b):
    if g.kind == K_XOR:
        return a ^ b
    return g.op_t[a, b]


cdef inline int64_t ginv(CGroup g, int64_t a):
    if g.kind == K_XOR:
        return a
    return g.inv_t[a]


cdef int64_t gsample(CGroup g, Rng* r):
    cdef int64_t idx, mul
    cdef int i, j, tmp
    cdef int word[16]
    if g.kind == K_CYCLIC:
        return <int64_t>rand_below(r, <uint64_t>g.order)
    if g.kind == K_XOR:
        return <int64_t>rand_below(r, (<uint64_t>1) << g.n)
    if g.kind == K_VECP:
        idx = 0
        mul = 1
        for i in range(g.n):
            idx += <int64_t>rand_below(r, <uint64_t>g.p) * mul
            mul *= g.p
        return idx
    if g.kind == K_SYM:
        for i in range(g.n):
            word[i] = i
        for i in range(g.n - 1):
            j = i + <int>rand_below(r, <uint64_t>(g.n - i))
            tmp = word[i]
            word[i] = word[j]
            word[j] = tmp
        idx = 0
        for i in range(g.n - 1, -1, -1):
            idx = idx * g.n + word[i]
        return g.enc2idx[idx]
    # dihedral: rotation draw then reflection draw, encoding s*n + rot
    idx = <int64_t>rand_below(r, <uint64_t>g.n)
    return <int64_t>rand_below(r, 2) * g.n + idx


cdef inline int64_t coeff_apply(CGroup g, int64_t c, int64_t x):
    cdef int64_t acc = g.identity
    cdef int64_t i
    for i in range(c):
        acc = gop(g, acc, x)
    return acc


cdef int cmp_i64(const void* a, const void* b) noexcept nogil:
    cdef int64_t x = (<const int64_t*>a)[0]
    cdef int64_t y = (<const int64_t*>b)[0]
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


cdef class CBatch:
    cdef CGroup gd
    cdef CGroup gh
    cdef int32_t[::1] base
    cdef uint8_t[::1] erased
    cdef uint8_t[::1] queried
    cdef int64_t[::1] dirty
    cdef long long ndirty
    cdef int64_t[::1] qdirty
    cdef long long nqdirty
    cdef int64_t trans_q[C_MAXQ]
    cdef long long nq
    cdef long long distinct_queried
    cdef long long erased_count
    cdef long long bottoms
    cdef long long budget
    cdef int t
    cdef int schedule                # 0 fixed_rate, 1 budget_managing
    cdef int strategy
    cdef int hunter_w
    cdef Rng adv
    cdef Rng tester
    cdef int64_t basis[C_MAXBASIS]   # span tracker, p = 2
    cdef int blen
    cdef int64_t span_list[C_MAXCAND]  # materialized span, p > 2
    cdef long long span_size
    cdef uint8_t[::1] in_span
    cdef bint failed

    def __init__(self, CGroup gd, CGroup gh, base):
        self.gd = gd
        self.gh = gh
        self.base = np.ascontiguousarray(base, dtype=np.int32)
        self.erased = np.zeros(gd.order, dtype=np.uint8)
        self.queried = np.zeros(gd.order, dtype=np.uint8)
        self.dirty = np.zeros(gd.order + 8, dtype=np.int64)
        self.qdirty = np.zeros(gd.order + 8, dtype=np.int64)
        if gd.kind == K_VECP:
            self.in_span = np.zeros(gd.order, dtype=np.uint8)
        else:
            self.in_span = np.zeros(1, dtype=np.uint8)


cdef void reset_trial(CBatch c, uint64_t seed, uint64_t trial):
    cdef long long i
    for i in range(c.ndirty):
        c.erased[c.dirty[i]] = 0
    for i in range(c.nqdirty):
        c.queried[c.qdirty[i]] = 0
    if c.gd.kind == K_VECP and c.strategy == S_SPAN:
        for i in range(c.span_size):
            c.in_span[c.span_list[i]] = 0
    c.ndirty = 0
    c.nqdirty = 0
    c.nq = 0
    c.distinct_queried = 0
    c.erased_count = 0
    c.bottoms = 0
    c.budget = 0
    c.blen = 0
    c.span_size = 0
    c.tester.state = derive3(seed, trial, 0)  # ROLE_TESTER
    c.adv.state = derive3(seed, trial, 1)     # ROLE_ADVERSARY


cdef inline void erase_point(CBatch c, int64_t x):
    if not c.erased[x]:
        c.erased[x] = 1
        c.dirty[c.ndirty] = x
        c.ndirty += 1
        c.erased_count += 1


cdef void span_add(CBatch c, int64_t x):
    cdef int64_t v = x
    cdef int64_t acc, y, t
    cdef int i, cc
    cdef long long j, old
    cdef CGroup g = c.gd
    if g.kind == K_XOR:
        for i in range(c.blen):
            if (v ^ c.basis[i]) < v:
                v ^= c.basis[i]
        if v:
            if c.blen == C_MAXBASIS:
                c.failed = True
                return
            c.basis[c.blen] = v
            c.blen += 1
            i = c.blen - 1
            # ascending order == ascending leading bits
            while i > 0 and c.basis[i] < c.basis[i - 1]:
                t = c.basis[i]
                c.basis[i] = c.basis[i - 1]
                c.basis[i - 1] = t
                i -= 1
        return
    if c.span_size == 0:
        c.span_list[0] = g.identity
        c.in_span[g.identity] = 1
        c.span_size = 1
    if c.in_span[x]:
        return
    old = c.span_size
    if old * g.p > C_MAXCAND:
        c.failed = True
        return
    for j in range(old):
        y = c.span_list[j]
        acc = y
        for cc in range(g.p - 1):
            acc = gop(g, acc, x)
            if not c.in_span[acc]:
                c.in_span[acc] = 1
                c.span_list[c.span_size] = acc
                c.span_size += 1
    qsort(&c.span_list[0], c.span_size, sizeof(int64_t), cmp_i64)


cdef long long span_smallest(CBatch c, long long k, int64_t* out):
    cdef int s = 0
    cdef long long total, i, j
    if c.gd.kind == K_XOR:
        while s < c.blen and (1LL << s) < k:
            s += 1
        out[0] = 0
        total = 1
        for i in range(s):
            for j in range(total):
                out[total + j] = out[j] ^ c.basis[i]
            total <<= 1
        qsort(out, total, sizeof(int64_t), cmp_i64)
        return total if total < k else k
    total = c.span_size if c.span_size < k else k
    for i in range(total):
        out[i] = c.span_list[i]
    return total


cdef void run_strategy(CBatch c):
    cdef long long want, room, got, i, ncand
    cdef int64_t x, y
    cdef int nw, size, mask, signs, bit, pos
    cdef int64_t window[32]
    cdef int64_t picks[32]
    cdef int64_t cand[C_MAXCAND]
    cdef CGroup g = c.gd
    if c.strategy == S_NULL:
        return
    if c.strategy == S_SPAN:
        # tracker sees every query even on a zero budget
        span_add(c, c.trans_q[c.nq - 1])
    if c.budget <= 0:
        return
    if c.strategy == S_UNIFORM:
        room = g.order - c.erased_count
        want = c.budget if c.budget < room else room
        got = 0
        while got < want:
            x = gsample(g, &c.adv)
            if c.erased[x]:
                continue
            erase_point(c, x)
            got += 1
        c.budget -= got
        return
    if c.strategy == S_SUM_HUNTER:
        # last w distinct queries, restored to chronological order
        nw = 0
        i = c.nq - 1
        while i >= 0 and nw < c.hunter_w:
            x = c.trans_q[i]
            bit = 0
            for pos in range(nw):
                if window[pos] == x:
                    bit = 1
                    break
            if not bit:
                window[nw] = x
                nw += 1
            i -= 1
        for pos in range(nw // 2):
            y = window[pos]
            window[pos] = window[nw - 1 - pos]
            window[nw - 1 - pos] = y
        got = 0
        for size in range(nw, 0, -1):
            for mask in range(1, 1 << nw):
                bit = 0
                for pos in range(nw):
                    if mask >> pos & 1:
                        bit += 1
                if bit != size:
                    continue
                bit = 0
                for pos in range(nw):
                    if mask >> pos & 1:
                        picks[bit] = window[pos]
                        bit += 1
                for signs in range(1 << size):
                    y = g.identity
                    for pos in range(size):
                        if signs >> pos & 1:
                            y = gop(g, y, ginv(g, picks[pos]))
                        else:
                            y = gop(g, y, picks[pos])
                    if c.erased[y] or c.queried[y]:
                        continue
                    erase_point(c, y)
                    got += 1
                    if got == c.budget:
                        c.budget = 0
                        return
        c.budget -= got
        return
    # span eraser: erase smallest span elements, sparing queried points
    want = c.budget + c.distinct_queried + c.erased_count + 1
    # the xor enumeration rounds up to the next power of two
    if want > (C_MAXCAND >> 1):
        c.failed = True
        return
    ncand = span_smallest(c, want, cand)
    # the reference checks candidates only against pre-round erasures and
    # queried points, so duplicate candidates (possible when the tracker
    # basis holds redundant vectors) burn budget without a new erasure;
    # duplicates are adjacent because the candidate list is sorted
    got = 0
    bit = 0  # previous candidate was taken this round
    for i in range(ncand):
        y = cand[i]
        if i > 0 and y == cand[i - 1] and bit:
            got += 1
            if got == c.budget:
                break
            continue
        if c.erased[y] or c.queried[y]:
            bit = 0
            continue
        erase_point(c, y)
        bit = 1
        got += 1
        if got == c.budget:
            break
    c.budget -= got


cdef int oracle_query(CBatch c, int64_t x, int64_t* ans):
    """Answer a query; returns 1 when the answer is bottom."""
    cdef int bottom = 0
    if c.erased[x]:
        bottom = 1
        ans[0] = -1
    else:
        ans[0] = c.base[x]
    if c.nq >= C_MAXQ:
        c.failed = True
        return bottom
    c.trans_q[c.nq] = x
    c.nq += 1
    if not c.queried[x]:
        c.queried[x] = 1
        c.qdirty[c.nqdirty] = x
        c.nqdirty += 1
        c.distinct_queried += 1
    if bottom:
        c.bottoms += 1
    if c.schedule == 0:
        c.budget = c.t
    else:
        c.budget += c.t
    run_strategy(c)
    if c.schedule == 0:
        c.budget = 0
    return bottom


# ---------------------------------------------------------------------------
# tester trial kernels (1 = accept, 0 = reject)


cdef int tuple_trial(CBatch c, int k, int sign_mode, int32_t* fixed_signs):
    """sign_mode: 0 random signs, 1 fixed signs, 2 random coefficients."""
    cdef int64_t xs[C_MAXTUP]
    cdef int64_t sig[C_MAXTUP]
    cdef int64_t ans[C_MAXTUP]
    cdef int64_t a, fa, acc
    cdef int i
    cdef CGroup g = c.gd
    cdef CGroup h = c.gh
    for i in range(k):
        xs[i] = gsample(g, &c.tester)
    if sign_mode == 0:
        for i in range(k):
            sig[i] = <int64_t>rand_below(&c.tester, 2)  # 0 plus, 1 minus
    elif sign_mode == 1:
        for i in range(k):
            sig[i] = fixed_signs[i]
    else:
        for i in range(k):
            sig[i] = 1 + <int64_t>rand_below(&c.tester, <uint64_t>(g.p - 1))
    for i in range(k):
        if oracle_query(c, xs[i], &ans[i]):
            return 1
    a = g.identity
    for i in range(k):
        if sign_mode == 2:
            a = gop(g, a, coeff_apply(g, sig[i], xs[i]))
        elif sig[i]:
            a = gop(g, a, ginv(g, xs[i]))
        else:
            a = gop(g, a, xs[i])
    if oracle_query(c, a, &fa):
        return 1
    acc = h.identity
    for i in range(k):
        if sign_mode == 2:
            acc = gop(h, acc, coeff_apply(h, sig[i], ans[i]))
        elif sig[i]:
            acc = gop(h, acc, ginv(h, ans[i]))
        else:
            acc = gop(h, acc, ans[i])
    return 1 if acc == fa else 0


cdef int unpredictable_trial(CBatch c, int m, int coeffs):
    cdef int64_t xs[C_MAXTUP]
    cdef int64_t sig[C_MAXTUP]
    cdef int64_t ans[C_MAXTUP]
    cdef int idx[C_MAXTUP]
    cdef int sub[C_MAXTUP]
    cdef int64_t y, fy, acc
    cdef int i, j, tmp
    cdef CGroup g = c.gd
    cdef CGroup h = c.gh
    for i in range(m):
        xs[i] = gsample(g, &c.tester)
    for i in range(m):
        if oracle_query(c, xs[i], &ans[i]):
            return 1
    if coeffs:
        for i in range(m):
            sig[i] = 1 + <int64_t>rand_below(&c.tester, <uint64_t>(g.p - 1))
    else:
        for i in range(m):
            sig[i] = <int64_t>rand_below(&c.tester, 2)
    for i in range(m):
        idx[i] = i
    for i in range(m // 2):
        j = i + <int>rand_below(&c.tester, <uint64_t>(m - i))
        tmp = idx[i]
        idx[i] = idx[j]
        idx[j] = tmp
    for i in range(m // 2):
        sub[i] = idx[i]
    # insertion sort, m/2 is small
    for i in range(1, m // 2):
        tmp = sub[i]
        j = i - 1
        while j >= 0 and sub[j] > tmp:
            sub[j + 1] = sub[j]
            j -= 1
        sub[j + 1] = tmp
    y = g.identity
    for i in range(m // 2):
        j = sub[i]
        if coeffs:
            y = gop(g, y, coeff_apply(g, sig[j], xs[j]))
        elif sig[j]:
            y = gop(g, y, ginv(g, xs[j]))
        else:
            y = gop(g, y, xs[j])
    if oracle_query(c, y, &fy):
        return 1
    acc = h.identity
    for i in range(m // 2):
        j = sub[i]
        if coeffs:
            acc = gop(h, acc, coeff_apply(h, sig[j], ans[j]))
        elif sig[j]:
            acc = gop(h, acc, ginv(h, ans[j]))
        else:
            acc = gop(h, acc, ans[j])
    return 1 if acc == fy else 0


cdef int online_trial(CBatch c, int m, int reps, int coeffs):
    cdef int i
    for i in range(reps):
        if not unpredictable_trial(c, m, coeffs):
            return 0
        if c.failed:
            return 1
    return 1


cdef int gr_trial(CBatch c, int sample_count, int checks,
                  int64_t* work_vals, uint8_t* work_mask, int64_t* members):
    cdef int64_t xs[C_MAXSAMP]
    cdef int64_t ans[C_MAXSAMP]
    cdef int64_t rows_v[C_MAXSAMP]
    cdef int64_t rows_val[C_MAXSAMP]
    cdef int nrows = 0
    cdef int64_t v, val, z, fz, expect, y
    cdef int i, j, covers
    cdef long long nmem, mi, snap
    cdef CGroup g = c.gd
    cdef CGroup h = c.gh
    for i in range(sample_count):
        xs[i] = gsample(g, &c.tester)
    if g.kind == K_XOR:
        for i in range(sample_count):
            v = xs[i]
            for j in range(nrows):
                if (v ^ rows_v[j]) < v:
                    v ^= rows_v[j]
            if v:
                rows_v[nrows] = v
                nrows += 1
        covers = 1 if nrows == g.n else 0
    else:
        # incremental subset sums with early stop
        nmem = 1
        members[0] = g.identity
        work_mask[g.identity] = 1
        covers = 1 if g.order == 1 else 0
        for i in range(sample_count):
            snap = nmem
            for mi in range(snap):
                z = gop(g, members[mi], xs[i])
                if not work_mask[z]:
                    work_mask[z] = 1
                    members[nmem] = z
                    nmem += 1
            if nmem == g.order:
                covers = 1
                break
        for mi in range(nmem):
            work_mask[members[mi]] = 0
    if not covers:
        return 1
    for i in range(sample_count):
        if oracle_query(c, xs[i], &ans[i]):
            return 1
    if g.kind == K_XOR:
        nrows = 0
        for i in range(sample_count):
            v = xs[i]
            val = ans[i]
            for j in range(nrows):
                if (v ^ rows_v[j]) < v:
                    v ^= rows_v[j]
                    val = gop(h, val, ginv(h, rows_val[j]))
            if v:
                # keep rows sorted descending by vector
                j = nrows
                while j > 0 and rows_v[j - 1] < v:
                    rows_v[j] = rows_v[j - 1]
                    rows_val[j] = rows_val[j - 1]
                    j -= 1
                rows_v[j] = v
                rows_val[j] = val
                nrows += 1
            elif val != h.identity:
                return 0
        for i in range(checks):
            z = gsample(g, &c.tester)
            if oracle_query(c, z, &fz):
                return 1
            expect = h.identity
            v = z
            for j in range(nrows):
                if (v ^ rows_v[j]) < v:
                    v ^= rows_v[j]
                    expect = gop(h, expect, rows_val[j])
            if expect != fz:
                return 0
        return 1
    # generic subset-sum extension with values
    nmem = 1
    members[0] = g.identity
    work_mask[g.identity] = 1
    work_vals[g.identity] = h.identity
    for i in range(sample_count):
        snap = nmem
        for mi in range(snap):
            y = members[mi]
            z = gop(g, y, xs[i])
            val = gop(h, work_vals[y], ans[i])
            if work_mask[z]:
                if work_vals[z] != val:
                    for mi in range(nmem):
                        work_mask[members[mi]] = 0
                    return 0
            else:
                work_mask[z] = 1
                work_vals[z] = val
                members[nmem] = z
                nmem += 1
    covers = 1
    for i in range(checks):
        z = gsample(g, &c.tester)
        if oracle_query(c, z, &fz):
            break
        if work_vals[z] != fz:
            covers = 0
            break
    for mi in range(nmem):
        work_mask[members[mi]] = 0
    return covers


cdef int vec_rank(CGroup g, int64_t* xs, int count):
    """Rank over F_p of packed digit vectors (p > 2, n <= 32)."""
    cdef int64_t rows[C_RANKROWS][32]
    cdef int pivots[C_RANKROWS]
    cdef int nrows = 0
    cdef int64_t digits[32]
    cdef int64_t v, cc, f, inv_lead
    cdef int i, j, d, lead
    for i in range(count):
        v = xs[i]
        for d in range(g.n):
            digits[d] = v % g.p
            v //= g.p
        for j in range(nrows):
            cc = digits[pivots[j]]
            if cc:
                inv_lead = 1
                for d in range(1, g.p):
                    if (rows[j][pivots[j]] * d) % g.p == 1:
                        inv_lead = d
                        break
                f = (cc * inv_lead) % g.p
                for d in range(g.n):
                    digits[d] = (digits[d] - f * rows[j][d]) % g.p
                    if digits[d] < 0:
                        digits[d] += g.p
        lead = -1
        for d in range(g.n):
            if digits[d]:
                lead = d
                break
        if lead >= 0:
            for d in range(g.n):
                rows[nrows][d] = digits[d]
            pivots[nrows] = lead
            nrows += 1
    return nrows


cdef int gensub_trial(CBatch c, int m, int checks,
                      int64_t* work_vals, uint8_t* work_mask, int64_t* members):
    cdef int64_t xs[C_MAXSAMP]
    cdef int64_t ans[C_MAXSAMP]
    cdef int64_t rows_v[C_MAXSAMP]
    cdef int64_t rows_val[C_MAXSAMP]
    cdef int nrows = 0
    cdef int64_t v, val, z, fz, expect, y, ge, gv
    cdef int i, j, generates, e
    cdef long long nmem, head, mi
    cdef CGroup g = c.gd
    cdef CGroup h = c.gh
    for i in range(m):
        xs[i] = gsample(g, &c.tester)
    if g.kind == K_XOR:
        for i in range(m):
            v = xs[i]
            for j in range(nrows):
                if (v ^ rows_v[j]) < v:
                    v ^= rows_v[j]
            if v:
                rows_v[nrows] = v
                nrows += 1
        generates = 1 if nrows == g.n else 0
    elif g.kind == K_VECP:
        generates = 1 if vec_rank(g, xs, m) == g.n else 0
    else:
        # breadth-first closure of the sample
        nmem = 1
        members[0] = g.identity
        work_mask[g.identity] = 1
        head = 0
        while head < nmem:
            y = members[head]
            head += 1
            for i in range(m):
                for e in range(2):
                    ge = xs[i] if e == 0 else ginv(g, xs[i])
                    z = gop(g, y, ge)
                    if not work_mask[z]:
                        work_mask[z] = 1
                        members[nmem] = z
                        nmem += 1
        generates = 1 if nmem == g.order else 0
        for mi in range(nmem):
            work_mask[members[mi]] = 0
    if not generates:
        return 1
    for i in range(m):
        if oracle_query(c, xs[i], &ans[i]):
            return 1
    if g.kind == K_XOR:
        nrows = 0
        for i in range(m):
            v = xs[i]
            val = ans[i]
            for j in range(nrows):
                if (v ^ rows_v[j]) < v:
                    v ^= rows_v[j]
                    val = gop(h, val, ginv(h, rows_val[j]))
            if v:
                j = nrows
                while j > 0 and rows_v[j - 1] < v:
                    rows_v[j] = rows_v[j - 1]
                    rows_val[j] = rows_val[j - 1]
                    j -= 1
                rows_v[j] = v
                rows_val[j] = val
                nrows += 1
            elif val != h.identity:
                return 0
        for i in range(checks):
            z = gsample(g, &c.tester)
            if oracle_query(c, z, &fz):
                return 1
            expect = h.identity
            v = z
            for j in range(nrows):
                if (v ^ rows_v[j]) < v:
                    v ^= rows_v[j]
                    expect = gop(h, expect, rows_val[j])
            if expect != fz:
                return 0
        return 1
    # value-carrying closure; conflict on any disagreeing edge
    nmem = 1
    members[0] = g.identity
    work_mask[g.identity] = 1
    work_vals[g.identity] = h.identity
    head = 0
    generates = 1
    while head < nmem and generates:
        y = members[head]
        head += 1
        for i in range(m):
            for e in range(2):
                if e == 0:
                    ge = xs[i]
                    gv = ans[i]
                else:
                    ge = ginv(g, xs[i])
                    gv = ginv(h, ans[i])
                z = gop(g, y, ge)
                val = gop(h, work_vals[y], gv)
                if work_mask[z]:
                    if work_vals[z] != val:
                        generates = 0
                        break
                else:
                    work_mask[z] = 1
                    work_vals[z] = val
                    members[nmem] = z
                    nmem += 1
            if not generates:
                break
    if not generates:
        for mi in range(nmem):
            work_mask[members[mi]] = 0
        return 0
    e = 1
    for i in range(checks):
        z = gsample(g, &c.tester)
        if oracle_query(c, z, &fz):
            break
        if work_vals[z] != fz:
            e = 0
            break
    for mi in range(nmem):
        work_mask[members[mi]] = 0
    return e


cdef int zero_trial(CBatch c, int checks):
    cdef int64_t z, fz
    cdef int i
    for i in range(checks):
        z = gsample(c.gd, &c.tester)
        if oracle_query(c, z, &fz):
            return 1
        if fz != c.gh.identity:
            return 0
    return 1


def run_batch(CGroup gd, CGroup gh, base_vals, int tester, dict params,
              int strategy, int hunter_w, int schedule, int t,
              long long trials, unsigned long long seed):
    """Run `trials` independent trials of one tester against one dense
    instance; returns (verdicts, queries, erasures_seen) arrays.

    Raises RuntimeError if any trial exceeds a compiled-path limit; the
    caller should rerun the batch on the Python path.
    """
    cdef CBatch c = CBatch(gd, gh, base_vals)
    c.t = t
    c.schedule = schedule
    c.strategy = strategy
    c.hunter_w = hunter_w
    c.failed = False

    cdef int k = params.get("k", 0)
    cdef int m = params.get("m", 0)
    cdef int reps = params.get("reps", 0)
    cdef int checks = params.get("checks", 0)
    cdef int sample_count = params.get("sample_count", 0)
    if k > C_MAXTUP or m > C_MAXTUP or sample_count > C_MAXSAMP:
        raise RuntimeError("batch parameters exceed compiled-path limits")
    if tester == T_GENSUB and m > C_MAXSAMP:
        raise RuntimeError("batch parameters exceed compiled-path limits")
    if hunter_w > 16:
        raise RuntimeError("sum hunter window too wide for the compiled path")
    fixed = params.get("signs")
    cdef int32_t[::1] fsigns
    if fixed is not None:
        fsigns = np.ascontiguousarray(fixed, dtype=np.int32)
    else:
        fsigns = np.zeros(1, dtype=np.int32)

    verdicts = np.zeros(trials, dtype=np.uint8)
    queries = np.zeros(trials, dtype=np.int32)
    erasures = np.zeros(trials, dtype=np.int32)
    cdef uint8_t[::1] vview = verdicts
    cdef int32_t[::1] qview = queries
    cdef int32_t[::1] eview = erasures

    wsize = gd.order if tester in (T_GR, T_GENSUB) and gd.kind != K_XOR else 1
    work_vals_arr = np.zeros(wsize, dtype=np.int64)
    work_mask_arr = np.zeros(wsize, dtype=np.uint8)
    members_arr = np.zeros(wsize, dtype=np.int64)
    cdef int64_t[::1] wvals = work_vals_arr
    cdef uint8_t[::1] wmask = work_mask_arr
    cdef int64_t[::1] wmem = members_arr

    cdef long long trial
    cdef int res = 0
    cdef int code = tester
    for trial in range(trials):
        reset_trial(c, seed, <uint64_t>trial)
        if code == T_SIGNS:
            res = tuple_trial(c, k, 0, NULL)
        elif code == T_FIXED_SIGNS:
            res = tuple_trial(c, k, 1, &fsigns[0])
        elif code == T_COEFFS:
            res = tuple_trial(c, k, 2, NULL)
        elif code == T_UNPRED_SIGNS:
            res = unpredictable_trial(c, m, 0)
        elif code == T_UNPRED_COEFFS:
            res = unpredictable_trial(c, m, 1)
        elif code == T_ONLINE_SIGNS:
            res = online_trial(c, m, reps, 0)
        elif code == T_ONLINE_COEFFS:
            res = online_trial(c, m, reps, 1)
        elif code == T_GR:
            res = gr_trial(c, sample_count, checks, &wvals[0], &wmask[0], &wmem[0])
        elif code == T_GENSUB:
            res = gensub_trial(c, m, checks, &wvals[0], &wmask[0], &wmem[0])
        else:
            res = zero_trial(c, checks)
        if c.failed:
            break
        vview[trial] = res
        qview[trial] = <int32_t>c.nq
        eview[trial] = <int32_t>c.bottoms
    if c.failed:
        raise RuntimeError("trial exceeded a compiled-path limit")
    return verdicts, queries, erasures


def debug_trial(CGroup gd, CGroup gh, base_vals, int tester, dict params,
                int strategy, int hunter_w, int schedule, int t,
                long long trial, unsigned long long seed):
    """Run a single trial and expose its transcript and erased set."""
    cdef CBatch c = CBatch(gd, gh, base_vals)
    c.t = t
    c.schedule = schedule
    c.strategy = strategy
    c.hunter_w = hunter_w
    c.failed = False
    cdef int k = params.get("k", 0)
    cdef int m = params.get("m", 0)
    cdef int reps = params.get("reps", 0)
    cdef int checks = params.get("checks", 0)
    cdef int sample_count = params.get("sample_count", 0)
    wsize = gd.order
    work_vals_arr = np.zeros(wsize, dtype=np.int64)
    work_mask_arr = np.zeros(wsize, dtype=np.uint8)
    members_arr = np.zeros(wsize, dtype=np.int64)
    cdef int64_t[::1] wvals = work_vals_arr
    cdef uint8_t[::1] wmask = work_mask_arr
    cdef int64_t[::1] wmem = members_arr
    reset_trial(c, seed, <uint64_t>trial)
    cdef int res
    if tester == T_SIGNS:
        res = tuple_trial(c, k, 0, NULL)
    elif tester == T_UNPRED_SIGNS:
        res = unpredictable_trial(c, m, 0)
    elif tester == T_ONLINE_SIGNS:
        res = online_trial(c, m, reps, 0)
    elif tester == T_GR:
        res = gr_trial(c, sample_count, checks, &wvals[0], &wmask[0], &wmem[0])
    elif tester == T_GENSUB:
        res = gensub_trial(c, m, checks, &wvals[0], &wmask[0], &wmem[0])
    else:
        raise ValueError("tester not wired for debug")
    erased = sorted(c.dirty[i] for i in range(c.ndirty))
    trans = [c.trans_q[i] for i in range(min(c.nq, <long long>C_MAXQ))]
    basis = [c.basis[i] for i in range(c.blen)]
    return res, trans, erased, basis, c.bottoms


def selftest_rng(unsigned long long state, int draws, unsigned long long below):
    """Expose the C stream for the equivalence tests."""
    cdef Rng r
    r.state = state
    out = []
    cdef int i
    for i in range(draws):
        if below:
            out.append(rand_below(&r, below))
        else:
            out.append(next_u64(&r))
    return out
