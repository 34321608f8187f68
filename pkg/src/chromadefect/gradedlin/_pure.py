"""Bit-packed F2 row elimination, pure python reference backend.

Rows are python ints used as bitmasks, bit j = column j.  The compiled
backend in _core.pyx implements the same three functions with the same
contracts; backend.py picks whichever is importable.
"""

__all__ = ["SparseEchelonGF2", "gf2_eliminate", "gf2_reduce", "gf2_rank"]


def gf2_eliminate(rows, ncols, track=False):
    """Forward elimination to row echelon form over F2.

    rows: list of int bitmasks (only bits < ncols may be set).
    Returns (rank, pivots, ech, ech_combos, kernel_combos) where

      pivots[k]        pivot column of echelon row k (lowest set bit),
      ech[k]           echelon row k,
      ech_combos[k]    bitmask over input row indices with
                       xor(rows[i] for i in combo) == ech[k],
      kernel_combos    one combo per dependent input row; xor of the
                       selected input rows is zero.

    The two combo lists are None unless track is true.
    """
    ech = []
    pivots = []
    pivot_at = {}
    combos = [] if track else None
    kernel = [] if track else None
    for i, row in enumerate(rows):
        v = row
        c = 1 << i
        while v:
            col = (v & -v).bit_length() - 1
            j = pivot_at.get(col)
            if j is None:
                pivot_at[col] = len(ech)
                pivots.append(col)
                ech.append(v)
                if track:
                    combos.append(c)
                break
            v ^= ech[j]
            if track:
                c ^= combos[j]
        else:
            if track:
                kernel.append(c)
    return len(ech), pivots, ech, combos, kernel


def gf2_reduce(ech, pivots, v):
    """Reduce v against an echelon basis.

    Returns (residue, posmask); posmask bit k is set when ech[k] was
    subtracted.  residue == 0 iff v lies in the row space: every nonzero
    row-space element has a pivot column as its lowest set bit, so
    stopping at a non-pivot lowest bit is a complete membership test.
    """
    pivot_at = {col: k for k, col in enumerate(pivots)}
    posmask = 0
    while v:
        col = (v & -v).bit_length() - 1
        k = pivot_at.get(col)
        if k is None:
            break
        v ^= ech[k]
        posmask ^= 1 << k
    return v, posmask


def gf2_rank(rows, ncols):
    return gf2_eliminate(rows, ncols)[0]


class SparseEchelonGF2:
    """Streaming rank of a sparse F2 matrix, fed one row at a time.

    A row is its support, a strictly increasing list of column indices.
    Feeding a row xors stored pivot rows into it until its lead column
    is unclaimed (the row becomes a pivot) or it cancels to zero.  Only
    the pivot rows are retained, so memory tracks the fill-in of the
    echelon rather than the size of the matrix.
    """

    __slots__ = ("ncols", "rank", "_pivots")

    def __init__(self, ncols):
        ncols = int(ncols)
        if ncols < 0:
            raise ValueError("ncols must be nonnegative")
        self.ncols = ncols
        self.rank = 0
        self._pivots = {}

    def add_row(self, cols):
        """Feed one row; True when it added a pivot, False when dependent."""
        row = list(cols)
        if row:
            if row[0] < 0 or row[-1] >= self.ncols:
                raise ValueError("column index out of range")
            if any(b <= a for a, b in zip(row, row[1:])):
                raise ValueError("row support must be strictly increasing")
        row = set(row)
        pivots = self._pivots
        while row:
            lead = min(row)
            other = pivots.get(lead)
            if other is None:
                pivots[lead] = row
                self.rank += 1
                return True
            row ^= other
        return False
