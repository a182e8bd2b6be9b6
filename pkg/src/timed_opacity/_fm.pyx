# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Fourier-Motzkin kernel on 64-bit integers.

Same contract as ``_fm_py``: rows are tuples ``(a_1, ..., a_n, c)`` meaning
``sum(a_i * v_i) + c >= 0`` (``> 0`` when strict).  Any intermediate value
that does not fit in a signed 64-bit integer raises ``OverflowError`` and the
caller falls back to the arbitrary-precision kernel.
"""

from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memcpy, memcmp, memmove

cdef extern from *:
    """
    static int fm_mul(long long a, long long b, long long *r) { return __builtin_mul_overflow(a, b, r); }
    static int fm_add(long long a, long long b, long long *r) { return __builtin_add_overflow(a, b, r); }
    """
    int fm_mul(long long a, long long b, long long *r) nogil
    int fm_add(long long a, long long b, long long *r) nogil


cdef struct Table:
    long long *rows   # count * width
    char *strict
    Py_ssize_t count
    Py_ssize_t cap
    Py_ssize_t width


cdef int table_init(Table *t, Py_ssize_t width, Py_ssize_t cap) except -1:
    if cap < 4:
        cap = 4
    t.rows = <long long *> malloc(cap * width * sizeof(long long))
    t.strict = <char *> malloc(cap)
    if t.rows == NULL or t.strict == NULL:
        raise MemoryError()
    t.count = 0
    t.cap = cap
    t.width = width
    return 0


cdef void table_free(Table *t):
    free(t.rows)
    free(t.strict)
    t.rows = NULL
    t.strict = NULL


cdef long long gcd64(long long a, long long b) nogil:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


cdef void normalize(long long *row, Py_ssize_t width) nogil:
    cdef long long g = 0
    cdef Py_ssize_t i
    for i in range(width):
        if row[i]:
            g = gcd64(g, row[i])
            if g == 1:
                return
    if g > 1:
        for i in range(width):
            row[i] = row[i] // g


cdef int table_insert(Table *t, long long *row, char strict) except -1:
    """Keep only the tightest row per coefficient vector (strict wins ties)."""
    cdef Py_ssize_t w = t.width
    cdef Py_ssize_t k
    cdef long long *slot
    for k in range(t.count):
        slot = t.rows + k * w
        if memcmp(slot, row, (w - 1) * sizeof(long long)) == 0:
            if row[w - 1] < slot[w - 1] or (row[w - 1] == slot[w - 1] and strict and not t.strict[k]):
                slot[w - 1] = row[w - 1]
                t.strict[k] = strict
            return 0
    if t.count == t.cap:
        t.cap *= 2
        t.rows = <long long *> realloc(t.rows, t.cap * w * sizeof(long long))
        t.strict = <char *> realloc(t.strict, t.cap)
        if t.rows == NULL or t.strict == NULL:
            raise MemoryError()
    memcpy(t.rows + t.count * w, row, w * sizeof(long long))
    t.strict[t.count] = strict
    t.count += 1
    return 0


cdef int load(Table *t, rows, strict, Py_ssize_t width, bint norm) except -1:
    cdef long long *buf = <long long *> malloc(width * sizeof(long long))
    cdef Py_ssize_t i
    if buf == NULL:
        raise MemoryError()
    try:
        for row, s in zip(rows, strict):
            if len(row) != width:
                raise ValueError("ragged rows")
            for i in range(width):
                buf[i] = row[i]  # raises OverflowError when too large
            if norm:
                normalize(buf, width)
            table_insert(t, buf, 1 if s else 0)
    finally:
        free(buf)
    return 0


cdef int step(Table *src, Table *dst, Py_ssize_t j) except -1:
    """One elimination step on column ``j`` from ``src`` into ``dst``."""
    cdef Py_ssize_t w = src.width
    cdef Py_ssize_t a, b, i
    cdef long long *p
    cdef long long *n
    cdef long long x, y
    cdef long long ka, kb
    cdef long long *buf = <long long *> malloc(w * sizeof(long long))
    if buf == NULL:
        raise MemoryError()
    try:
        for a in range(src.count):
            if src.rows[a * w + j] == 0:
                table_insert(dst, src.rows + a * w, src.strict[a])
        for a in range(src.count):
            p = src.rows + a * w
            if p[j] <= 0:
                continue
            for b in range(src.count):
                n = src.rows + b * w
                if n[j] >= 0:
                    continue
                ka = -n[j]
                kb = p[j]
                for i in range(w):
                    if fm_mul(ka, p[i], &x) or fm_mul(kb, n[i], &y) or fm_add(x, y, &buf[i]):
                        raise OverflowError("coefficient exceeds 64 bits")
                normalize(buf, w)
                table_insert(dst, buf, src.strict[a] or src.strict[b])
    finally:
        free(buf)
    return 0


def eliminate(rows, strict, Py_ssize_t j):
    rows = list(rows)
    strict = list(strict)
    if not rows:
        return [], []
    cdef Py_ssize_t w = len(rows[0])
    cdef Table src, dst
    cdef Py_ssize_t k, i
    table_init(&src, w, len(rows))
    table_init(&dst, w, len(rows))
    try:
        load(&src, rows, strict, w, False)
        step(&src, &dst, j)
        out_rows = []
        out_strict = []
        for k in range(dst.count):
            out_rows.append(tuple([dst.rows[k * w + i] for i in range(w)]))
            out_strict.append(bool(dst.strict[k]))
        return out_rows, out_strict
    finally:
        table_free(&src)
        table_free(&dst)


def is_feasible(rows, strict, Py_ssize_t nvars):
    rows = list(rows)
    if not rows:
        return True
    cdef Py_ssize_t w = nvars + 1
    cdef Table cur, nxt, tmp
    cdef Py_ssize_t k, i, j, best
    cdef long long np_, nn, cost, best_cost
    cdef bint nonzero
    cdef char *live = <char *> malloc(nvars + 1)
    if live == NULL:
        raise MemoryError()
    for j in range(nvars):
        live[j] = 1
    table_init(&cur, w, len(rows))
    table_init(&nxt, w, len(rows))
    try:
        load(&cur, rows, strict, w, True)
        while True:
            # drop constant rows, failing on contradictions
            k = 0
            while k < cur.count:
                nonzero = False
                for i in range(nvars):
                    if cur.rows[k * w + i]:
                        nonzero = True
                        break
                if not nonzero:
                    if cur.rows[k * w + nvars] < 0 or (cur.rows[k * w + nvars] == 0 and cur.strict[k]):
                        return False
                    cur.count -= 1
                    if k != cur.count:
                        memcpy(cur.rows + k * w, cur.rows + cur.count * w, w * sizeof(long long))
                        cur.strict[k] = cur.strict[cur.count]
                    continue
                k += 1
            if cur.count == 0:
                return True
            best = -1
            best_cost = 0
            for j in range(nvars):
                if not live[j]:
                    continue
                np_ = 0
                nn = 0
                for k in range(cur.count):
                    if cur.rows[k * w + j] > 0:
                        np_ += 1
                    elif cur.rows[k * w + j] < 0:
                        nn += 1
                if np_ == 0 and nn == 0:
                    continue
                cost = np_ * nn - np_ - nn
                if best < 0 or cost < best_cost:
                    best = j
                    best_cost = cost
            live[best] = 0
            nxt.count = 0
            step(&cur, &nxt, best)
            tmp = cur
            cur = nxt
            nxt = tmp
    finally:
        free(live)
        table_free(&cur)
        table_free(&nxt)


# ---------------------------------------------------------------------------
# elimination pruned by Chernikov's rule

cdef struct HTable:
    long long *rows   # count * width
    char *strict
    unsigned long long *hist  # count * hw words
    Py_ssize_t count
    Py_ssize_t cap
    Py_ssize_t width
    Py_ssize_t hw
    Py_ssize_t *index  # open addressing over coefficient vectors, -1 = empty
    Py_ssize_t icap    # power of two, at least twice cap


cdef size_t hash_key(long long *row, Py_ssize_t n) nogil:
    cdef size_t h = 1469598103934665603ULL
    cdef Py_ssize_t i
    for i in range(n):
        h = (h ^ <size_t> row[i]) * 1099511628211ULL
    return h ^ (h >> 29)


cdef int htable_reindex(HTable *t) except -1:
    cdef Py_ssize_t k, i
    cdef size_t mask
    while t.icap < 2 * t.cap:
        t.icap *= 2
    free(t.index)
    t.index = <Py_ssize_t *> malloc(t.icap * sizeof(Py_ssize_t))
    if t.index == NULL:
        raise MemoryError()
    for i in range(t.icap):
        t.index[i] = -1
    mask = t.icap - 1
    for k in range(t.count):
        i = hash_key(t.rows + k * t.width, t.width - 1) & mask
        while t.index[i] >= 0:
            i = (i + 1) & mask
        t.index[i] = k
    return 0


cdef int htable_reset(HTable *t) except -1:
    t.count = 0
    return htable_reindex(t)


cdef int htable_init(HTable *t, Py_ssize_t width, Py_ssize_t hw, Py_ssize_t cap) except -1:
    if cap < 4:
        cap = 4
    t.rows = <long long *> malloc(cap * width * sizeof(long long))
    t.strict = <char *> malloc(cap)
    t.hist = <unsigned long long *> malloc(cap * hw * sizeof(unsigned long long))
    if t.rows == NULL or t.strict == NULL or t.hist == NULL:
        raise MemoryError()
    t.count = 0
    t.cap = cap
    t.width = width
    t.hw = hw
    t.index = NULL
    t.icap = 8
    return htable_reindex(t)


cdef void htable_free(HTable *t):
    free(t.rows)
    free(t.strict)
    free(t.hist)
    free(t.index)
    t.rows = NULL
    t.strict = NULL
    t.hist = NULL
    t.index = NULL


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef Py_ssize_t popcount(unsigned long long *h, Py_ssize_t hw) nogil:
    cdef Py_ssize_t i, n = 0
    for i in range(hw):
        n += __builtin_popcountll(h[i])
    return n


cdef int htable_insert(HTable *t, long long *row, char strict, unsigned long long *hist) except -1:
    """Tightest row per coefficient vector; on a full tie the smaller history."""
    cdef Py_ssize_t w = t.width
    cdef Py_ssize_t hw = t.hw
    cdef Py_ssize_t k
    cdef size_t i, mask = t.icap - 1
    cdef long long *slot
    cdef bint better
    i = hash_key(row, w - 1) & mask
    while t.index[i] >= 0:
        k = t.index[i]
        slot = t.rows + k * w
        if memcmp(slot, row, (w - 1) * sizeof(long long)) == 0:
            better = row[w - 1] < slot[w - 1] or (row[w - 1] == slot[w - 1] and strict and not t.strict[k])
            if not better and row[w - 1] == slot[w - 1] and (strict != 0) == (t.strict[k] != 0):
                better = popcount(hist, hw) < popcount(t.hist + k * hw, hw)
            if better:
                slot[w - 1] = row[w - 1]
                t.strict[k] = strict
                memcpy(t.hist + k * hw, hist, hw * sizeof(unsigned long long))
            return 0
        i = (i + 1) & mask
    t.index[i] = t.count
    memcpy(t.rows + t.count * w, row, w * sizeof(long long))
    t.strict[t.count] = strict
    memcpy(t.hist + t.count * hw, hist, hw * sizeof(unsigned long long))
    t.count += 1
    if t.count == t.cap:
        t.cap *= 2
        t.rows = <long long *> realloc(t.rows, t.cap * w * sizeof(long long))
        t.strict = <char *> realloc(t.strict, t.cap)
        t.hist = <unsigned long long *> realloc(t.hist, t.cap * hw * sizeof(unsigned long long))
        if t.rows == NULL or t.strict == NULL or t.hist == NULL:
            raise MemoryError()
        htable_reindex(t)
    return 0


def eliminate_all(rows, strict, Py_ssize_t nvars):
    rows = list(rows)
    strict = list(strict)
    cdef Py_ssize_t m = len(rows)
    cdef Py_ssize_t w = nvars + 1
    cdef Py_ssize_t hw = (m + 63) // 64 if m else 1
    cdef HTable cur, nxt, tmp
    cdef Py_ssize_t i, k, a, b, j, best, step = 0
    cdef long long np_, nn, cost, best_cost, x, y, ka, kb
    cdef long long *p
    cdef long long *n
    cdef bint nonzero
    cdef long long *buf = <long long *> malloc(w * sizeof(long long))
    cdef unsigned long long *hbuf = <unsigned long long *> malloc(hw * sizeof(unsigned long long))
    if buf == NULL or hbuf == NULL:
        free(buf)
        free(hbuf)
        raise MemoryError()
    htable_init(&cur, w, hw, m)
    htable_init(&nxt, w, hw, m)
    stages = []
    try:
        for k in range(m):
            row = rows[k]
            if len(row) != w:
                raise ValueError("ragged rows")
            for i in range(w):
                buf[i] = row[i]
            normalize(buf, w)
            for i in range(hw):
                hbuf[i] = 0
            hbuf[k // 64] = 1ULL << (k % 64)
            htable_insert(&cur, buf, 1 if strict[k] else 0, hbuf)
        while True:
            # drop constant rows (failing on contradictions) and rows whose
            # history is too large for the number of steps taken
            k = 0
            while k < cur.count:
                nonzero = False
                for i in range(nvars):
                    if cur.rows[k * w + i]:
                        nonzero = True
                        break
                if not nonzero:
                    if cur.rows[k * w + nvars] < 0 or (cur.rows[k * w + nvars] == 0 and cur.strict[k]):
                        return False, []
                if not nonzero or popcount(cur.hist + k * hw, hw) > step + 1:
                    # remove keeping insertion order
                    if k + 1 < cur.count:
                        memmove(cur.rows + k * w, cur.rows + (k + 1) * w, (cur.count - k - 1) * w * sizeof(long long))
                        memmove(cur.strict + k, cur.strict + k + 1, cur.count - k - 1)
                        memmove(cur.hist + k * hw, cur.hist + (k + 1) * hw, (cur.count - k - 1) * hw * sizeof(unsigned long long))
                    cur.count -= 1
                    continue
                k += 1
            if cur.count == 0:
                return True, stages
            best = -1
            best_cost = 0
            for j in range(nvars):
                np_ = 0
                nn = 0
                for k in range(cur.count):
                    if cur.rows[k * w + j] > 0:
                        np_ += 1
                    elif cur.rows[k * w + j] < 0:
                        nn += 1
                if np_ == 0 and nn == 0:
                    continue
                cost = np_ * nn - np_ - nn
                if best < 0 or cost < best_cost:
                    best = j
                    best_cost = cost
            j = best
            step += 1
            htable_reset(&nxt)
            used = []
            for k in range(cur.count):
                if cur.rows[k * w + j] == 0:
                    htable_insert(&nxt, cur.rows + k * w, cur.strict[k], cur.hist + k * hw)
                else:
                    used.append((tuple([cur.rows[k * w + i] for i in range(w)]), bool(cur.strict[k])))
            stages.append((j, used))
            for a in range(cur.count):
                p = cur.rows + a * w
                if p[j] <= 0:
                    continue
                for b in range(cur.count):
                    n = cur.rows + b * w
                    if n[j] >= 0:
                        continue
                    for i in range(hw):
                        hbuf[i] = cur.hist[a * hw + i] | cur.hist[b * hw + i]
                    if popcount(hbuf, hw) > step + 1:
                        continue
                    ka = -n[j]
                    kb = p[j]
                    for i in range(w):
                        if fm_mul(ka, p[i], &x) or fm_mul(kb, n[i], &y) or fm_add(x, y, &buf[i]):
                            raise OverflowError("coefficient exceeds 64 bits")
                    normalize(buf, w)
                    htable_insert(&nxt, buf, cur.strict[a] or cur.strict[b], hbuf)
            tmp = cur
            cur = nxt
            nxt = tmp
    finally:
        free(buf)
        free(hbuf)
        htable_free(&cur)
        htable_free(&nxt)
