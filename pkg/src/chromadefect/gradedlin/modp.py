"""Exact linear algebra over prime fields.

Vectors over F_2 are int bitmasks; vectors over odd primes are tuples
of residues.  Matrices act on row vectors: a matrix M with nrows rows
and ncols columns is the map x -> x.M from F^nrows to F^ncols, row i
being the image of the i-th basis vector.  That orientation matches how
chain differentials are assembled everywhere downstream.
"""

from .backend import gf2_eliminate, gf2_reduce

__all__ = [
    "PrimeFieldMatrix",
    "SubquotientBasis",
    "vec_zero",
    "vec_from_terms",
    "vec_add",
    "vec_scale",
    "vec_entry",
    "vec_support",
    "vec_is_zero",
]


def vec_zero(p, n):
    return 0 if p == 2 else (0,) * n


def vec_from_terms(p, n, terms):
    if p == 2:
        v = 0
        for i, c in terms:
            if c % 2:
                v ^= 1 << i
        return v
    row = [0] * n
    for i, c in terms:
        row[i] = (row[i] + c) % p
    return tuple(row)


def vec_add(p, a, b):
    if p == 2:
        return a ^ b
    return tuple((x + y) % p for x, y in zip(a, b))


def vec_scale(p, v, c):
    if p == 2:
        return v if c % 2 else 0
    c %= p
    return tuple((c * x) % p for x in v)


def vec_entry(p, v, i):
    if p == 2:
        return (v >> i) & 1
    return v[i]


def vec_support(p, v, n):
    """List of (index, coefficient) pairs with nonzero coefficient."""
    if p == 2:
        out = []
        while v:
            low = v & -v
            out.append((low.bit_length() - 1, 1))
            v ^= low
        return out
    return [(i, c) for i, c in enumerate(v) if c]


def vec_is_zero(v):
    if isinstance(v, int):
        return v == 0
    return not any(v)


def fp_eliminate(p, rows, ncols, track=False):
    """Dense elimination mod an odd prime; mirrors gf2_eliminate."""
    ech = []
    pivots = []
    pivot_at = {}
    m = len(rows)
    combos = [] if track else None
    kernel = [] if track else None
    for i, row in enumerate(rows):
        v = list(row)
        c = None
        if track:
            c = [0] * m
            c[i] = 1
        while True:
            col = next((k for k in range(ncols) if v[k]), None)
            if col is None:
                if track:
                    kernel.append(tuple(c))
                break
            j = pivot_at.get(col)
            if j is None:
                inv = pow(v[col], p - 2, p)
                v = [(inv * x) % p for x in v]
                pivot_at[col] = len(ech)
                pivots.append(col)
                ech.append(tuple(v))
                if track:
                    combos.append(tuple((inv * x) % p for x in c))
                break
            f = v[col]
            ej = ech[j]
            v = [(a - f * b) % p for a, b in zip(v, ej)]
            if track:
                cj = combos[j]
                c = [(a - f * b) % p for a, b in zip(c, cj)]
    return len(ech), pivots, ech, combos, kernel


def fp_reduce(p, ech, pivots, ncols, v):
    """Reduce v against a normalized echelon; returns (residue, coeffs).

    coeffs[k] is the multiple of ech[k] that was subtracted.
    """
    pivot_at = {col: k for k, col in enumerate(pivots)}
    v = list(v)
    coeffs = [0] * len(ech)
    while True:
        col = next((k for k in range(ncols) if v[k]), None)
        if col is None:
            break
        k = pivot_at.get(col)
        if k is None:
            break
        f = v[col]
        v = [(a - f * b) % p for a, b in zip(v, ech[k])]
        coeffs[k] = (coeffs[k] + f) % p
    return tuple(v), coeffs


class PrimeFieldMatrix:
    """Row-major matrix over F_p with cached elimination data."""

    def __init__(self, p, nrows, ncols, rows=None):
        if p < 2:
            raise ValueError("p must be a prime >= 2")
        self.p = p
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            rows = [vec_zero(p, ncols) for _ in range(nrows)]
        if len(rows) != nrows:
            raise ValueError("row count mismatch")
        self.rows = list(rows)
        self._elim = None
        self._elim_tracked = None

    @classmethod
    def from_terms(cls, p, nrows, ncols, terms):
        """terms: iterable of (row, col, coefficient)."""
        if p == 2:
            rows = [0] * nrows
            for i, j, c in terms:
                if c % 2:
                    rows[i] ^= 1 << j
            return cls(p, nrows, ncols, rows)
        buf = [[0] * ncols for _ in range(nrows)]
        for i, j, c in terms:
            buf[i][j] = (buf[i][j] + c) % p
        return cls(p, nrows, ncols, [tuple(r) for r in buf])

    def _eliminate(self, track):
        if track:
            if self._elim_tracked is None:
                self._elim_tracked = self._run(True)
            return self._elim_tracked
        if self._elim is not None:
            return self._elim
        if self._elim_tracked is not None:
            return self._elim_tracked
        self._elim = self._run(False)
        return self._elim

    def _run(self, track):
        if self.p == 2:
            return gf2_eliminate(self.rows, self.ncols, track)
        return fp_eliminate(self.p, self.rows, self.ncols, track)

    def rank(self):
        return self._eliminate(False)[0]

    def kernel_vectors(self):
        """Basis of {x in F^nrows : x.M = 0}."""
        kernel = self._eliminate(True)[4]
        return list(kernel)

    def reduce_vector(self, v):
        rank, pivots, ech, _, _ = self._eliminate(False)
        if self.p == 2:
            return gf2_reduce(ech, pivots, v)[0]
        return fp_reduce(self.p, ech, pivots, self.ncols, v)[0]

    def in_row_space(self, v):
        return vec_is_zero(self.reduce_vector(v))

    def solve_combo(self, v):
        """x with x.M = v, expressed over the original rows, or None."""
        rank, pivots, ech, combos, _ = self._eliminate(True)
        if self.p == 2:
            residue, posmask = gf2_reduce(ech, pivots, v)
            if residue:
                return None
            x = 0
            while posmask:
                low = posmask & -posmask
                x ^= combos[low.bit_length() - 1]
                posmask ^= low
            return x
        residue, coeffs = fp_reduce(self.p, ech, pivots, self.ncols, v)
        if not vec_is_zero(residue):
            return None
        x = [0] * self.nrows
        for k, f in enumerate(coeffs):
            if f:
                for i, c in enumerate(combos[k]):
                    x[i] = (x[i] + f * c) % self.p
        return tuple(x)

    def apply(self, x):
        """Row action x.M for a single vector x over F^nrows."""
        p = self.p
        out = vec_zero(p, self.ncols)
        for i, c in vec_support(p, x, self.nrows):
            out = vec_add(p, out, vec_scale(p, self.rows[i], c))
        return out

    def entry(self, i, j):
        return vec_entry(self.p, self.rows[i], j)


class SubquotientBasis:
    """Coset representatives for ker/im inside F_p^ncols.

    image_rows span the boundary subspace, kernel_vectors span the
    cycles; both live in the same ambient row space.  Representatives
    are chosen greedily in input order, and coords() writes any further
    cycle in the chosen homology basis.
    """

    def __init__(self, p, ncols, image_rows, kernel_vectors):
        self.p = p
        self.ncols = ncols
        self._pivot_at = {}
        self._ech = []   # (row, tag); tag tracks representative content
        self.reps = []
        for row in image_rows:
            self._insert(row, None)
        for kv in kernel_vectors:
            residue, tag = self._reduce(kv)
            if vec_is_zero(residue):
                continue
            idx = len(self.reps)
            self.reps.append(kv)
            onetag = {idx: 1}
            self._insert_reduced(residue, self._tag_add(tag, onetag))

    @property
    def dim(self):
        return len(self.reps)

    def _tag_add(self, a, b):
        if a is None:
            return dict(b) if b else None
        if b is None:
            return dict(a)
        out = dict(a)
        for k, v in b.items():
            nv = (out.get(k, 0) + v) % self.p
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
        return out or None

    def _tag_scale(self, a, c):
        if a is None:
            return None
        c %= self.p
        if not c:
            return None
        return {k: (v * c) % self.p for k, v in a.items()}

    def _first_col(self, v):
        if self.p == 2:
            return (v & -v).bit_length() - 1 if v else None
        return next((k for k in range(self.ncols) if v[k]), None)

    def _reduce(self, v):
        p = self.p
        tag = None
        while True:
            col = self._first_col(v)
            if col is None:
                return v, tag
            k = self._pivot_at.get(col)
            if k is None:
                return v, tag
            row, rtag = self._ech[k]
            if p == 2:
                v = v ^ row
                tag = self._tag_add(tag, rtag)
            else:
                f = v[col]
                v = tuple((a - f * b) % p for a, b in zip(v, row))
                tag = self._tag_add(tag, self._tag_scale(rtag, -f))

    def _insert_reduced(self, v, tag):
        col = self._first_col(v)
        if col is None:
            return
        if self.p != 2:
            inv = pow(v[col], self.p - 2, self.p)
            v = tuple((inv * a) % self.p for a in v)
            tag = self._tag_scale(tag, inv)
        self._pivot_at[col] = len(self._ech)
        self._ech.append((v, tag))

    def _insert(self, v, tag):
        residue, rtag = self._reduce(v)
        if vec_is_zero(residue):
            return
        self._insert_reduced(residue, self._tag_add(rtag, tag))

    def coords(self, v):
        """Coordinates of the cycle v in the homology basis, as a dict."""
        residue, tag = self._reduce(v)
        if not vec_is_zero(residue):
            raise ValueError("vector is not a cycle modulo the image")
        if tag is None:
            return {}
        return {k: (-c) % self.p for k, c in tag.items() if c % self.p}
