# cython: boundscheck=False, wraparound=False, cdivision=True
"""Bit-packed F2 row elimination over C word arrays.

Compiled twin of _pure.gf2_eliminate with an identical contract; the
echelon rows come out in the same order, so the two backends are
interchangeable bit for bit.  Little-endian word layout is assumed.
"""

from cpython.bytes cimport PyBytes_FromStringAndSize
from libc.stdint cimport int64_t, uint32_t
from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memcpy, memset

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


cdef inline Py_ssize_t _lowest_bit(unsigned long long *row, Py_ssize_t nwords) nogil:
    cdef Py_ssize_t w
    for w in range(nwords):
        if row[w]:
            return 64 * w + __builtin_ctzll(row[w])
    return -1


cdef inline void _xor_into(unsigned long long *dst, unsigned long long *src,
                           Py_ssize_t nwords) nogil:
    cdef Py_ssize_t w
    for w in range(nwords):
        dst[w] ^= src[w]


def gf2_eliminate(rows, ncols, track=False):
    """See _pure.gf2_eliminate; same contract, same output order."""
    cdef Py_ssize_t m = len(rows)
    cdef bint want = bool(track)
    if m == 0:
        return 0, [], [], ([] if want else None), ([] if want else None)

    cdef Py_ssize_t W = ((<Py_ssize_t>ncols) + 63) >> 6
    if W <= 0:
        W = 1
    cdef Py_ssize_t Wm = (m + 63) >> 6

    cdef unsigned long long *buf = <unsigned long long *>malloc(m * W * 8)
    cdef unsigned long long *cmb = NULL
    cdef Py_ssize_t *pivot_at = <Py_ssize_t *>malloc((<Py_ssize_t>ncols + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *order = <Py_ssize_t *>malloc(m * sizeof(Py_ssize_t))
    cdef Py_ssize_t *pivcol = <Py_ssize_t *>malloc(m * sizeof(Py_ssize_t))
    cdef Py_ssize_t *kern = <Py_ssize_t *>malloc(m * sizeof(Py_ssize_t))
    if want:
        cmb = <unsigned long long *>malloc(m * Wm * 8)
    if buf is NULL or pivot_at is NULL or order is NULL or pivcol is NULL \
            or kern is NULL or (want and cmb is NULL):
        free(buf); free(cmb); free(pivot_at); free(order); free(pivcol); free(kern)
        raise MemoryError

    memset(pivot_at, 0xFF, (<Py_ssize_t>ncols + 1) * sizeof(Py_ssize_t))
    if want:
        memset(cmb, 0, m * Wm * 8)

    cdef Py_ssize_t i, col, j, nech = 0, nker = 0
    cdef bytes raw
    for i in range(m):
        raw = rows[i].to_bytes(W * 8, "little")
        memcpy(buf + i * W, <const char *>raw, W * 8)
        if want:
            cmb[i * Wm + (i >> 6)] |= (<unsigned long long>1) << (i & 63)

    with nogil:
        for i in range(m):
            while True:
                col = _lowest_bit(buf + i * W, W)
                if col < 0:
                    kern[nker] = i
                    nker += 1
                    break
                j = pivot_at[col]
                if j < 0:
                    pivot_at[col] = i
                    order[nech] = i
                    pivcol[nech] = col
                    nech += 1
                    break
                _xor_into(buf + i * W, buf + j * W, W)
                if want:
                    _xor_into(cmb + i * Wm, cmb + j * Wm, Wm)

    pivots = [pivcol[i] for i in range(nech)]
    ech = [
        int.from_bytes(PyBytes_FromStringAndSize(<char *>(buf + order[i] * W), W * 8), "little")
        for i in range(nech)
    ]
    combos = None
    kernel = None
    if want:
        combos = [
            int.from_bytes(PyBytes_FromStringAndSize(<char *>(cmb + order[i] * Wm), Wm * 8), "little")
            for i in range(nech)
        ]
        kernel = [
            int.from_bytes(PyBytes_FromStringAndSize(<char *>(cmb + kern[i] * Wm), Wm * 8), "little")
            for i in range(nker)
        ]

    free(buf); free(cmb); free(pivot_at); free(order); free(pivcol); free(kern)
    return nech, pivots, ech, combos, kernel


cdef class SparseEchelonGF2:
    """Streaming rank of a sparse F2 matrix; compiled twin of
    _pure.SparseEchelonGF2 with the same contract.

    Pivot rows are C arrays of uint32 column indices kept sorted; a fed
    row is reduced by merge-xor against the pivot sharing its lead until
    it lands in a free slot or cancels.  Memory follows the fill-in of
    the stored pivots, never the full matrix.
    """

    cdef Py_ssize_t _ncols
    cdef Py_ssize_t _rank
    cdef int64_t *_slot_of        # per column: index into _rows, or -1
    cdef uint32_t **_rows
    cdef Py_ssize_t *_lens
    cdef Py_ssize_t _nrows
    cdef Py_ssize_t _cap
    cdef uint32_t *_cur           # working row / merge scratch pair
    cdef uint32_t *_tmp
    cdef Py_ssize_t _bufcap

    def __cinit__(self, ncols):
        cdef Py_ssize_t n = ncols
        cdef Py_ssize_t i
        if n < 0:
            raise ValueError("ncols must be nonnegative")
        self._ncols = n
        self._slot_of = <int64_t *>malloc((n if n else 1) * sizeof(int64_t))
        if self._slot_of is NULL:
            raise MemoryError
        for i in range(n):
            self._slot_of[i] = -1

    def __dealloc__(self):
        cdef Py_ssize_t i
        if self._rows is not NULL:
            for i in range(self._nrows):
                free(self._rows[i])
        free(self._rows)
        free(self._lens)
        free(self._slot_of)
        free(self._cur)
        free(self._tmp)

    @property
    def ncols(self):
        return self._ncols

    @property
    def rank(self):
        return self._rank

    cdef int _grow_bufs(self, Py_ssize_t need) except -1:
        cdef Py_ssize_t cap = self._bufcap
        cdef uint32_t *p
        if need <= cap:
            return 0
        cap = 64 if cap == 0 else cap
        while cap < need:
            cap *= 2
        p = <uint32_t *>realloc(self._cur, cap * sizeof(uint32_t))
        if p is NULL:
            raise MemoryError
        self._cur = p
        p = <uint32_t *>realloc(self._tmp, cap * sizeof(uint32_t))
        if p is NULL:
            raise MemoryError
        self._tmp = p
        self._bufcap = cap
        return 0

    cdef int _install(self, Py_ssize_t n) except -1:
        # the working row (length n) becomes pivot row number _nrows
        cdef uint32_t **rp
        cdef Py_ssize_t *lp
        cdef Py_ssize_t cap
        cdef uint32_t *keep
        if self._nrows == self._cap:
            cap = 64 if self._cap == 0 else self._cap * 2
            rp = <uint32_t **>realloc(self._rows, cap * sizeof(uint32_t *))
            if rp is NULL:
                raise MemoryError
            self._rows = rp
            lp = <Py_ssize_t *>realloc(self._lens, cap * sizeof(Py_ssize_t))
            if lp is NULL:
                raise MemoryError
            self._lens = lp
            self._cap = cap
        keep = <uint32_t *>malloc(n * sizeof(uint32_t))
        if keep is NULL:
            raise MemoryError
        memcpy(keep, self._cur, n * sizeof(uint32_t))
        self._rows[self._nrows] = keep
        self._lens[self._nrows] = n
        self._slot_of[self._cur[0]] = self._nrows
        self._nrows += 1
        self._rank += 1
        return 0

    def add_row(self, cols):
        """Feed one row (strictly increasing column indices).

        Returns True when the row extended the echelon, False when it
        reduced to zero against the stored pivots.
        """
        cdef list seq = cols if type(cols) is list else list(cols)
        cdef Py_ssize_t n = len(seq)
        cdef Py_ssize_t i
        cdef long long v, prev = -1
        if n == 0:
            return False
        self._grow_bufs(n)
        for i in range(n):
            v = seq[i]
            if v <= prev:
                raise ValueError("row support must be strictly increasing")
            if v < 0 or v >= self._ncols:
                raise ValueError("column index out of range")
            prev = v
            self._cur[i] = <uint32_t>v

        cdef Py_ssize_t curlen = n
        cdef int64_t slot
        cdef uint32_t *piv
        cdef uint32_t *cur
        cdef uint32_t *out
        cdef Py_ssize_t pl, a, b, k
        cdef uint32_t x, y
        while curlen:
            slot = self._slot_of[self._cur[0]]
            if slot < 0:
                self._install(curlen)
                return True
            piv = self._rows[slot]
            pl = self._lens[slot]
            self._grow_bufs(curlen + pl)
            cur = self._cur
            out = self._tmp
            a = 0; b = 0; k = 0
            while a < curlen and b < pl:
                x = cur[a]
                y = piv[b]
                if x < y:
                    out[k] = x; k += 1; a += 1
                elif y < x:
                    out[k] = y; k += 1; b += 1
                else:
                    a += 1; b += 1
            while a < curlen:
                out[k] = cur[a]; k += 1; a += 1
            while b < pl:
                out[k] = piv[b]; k += 1; b += 1
            self._tmp = self._cur
            self._cur = out
            curlen = k
        return False
