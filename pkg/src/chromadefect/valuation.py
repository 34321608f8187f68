"""Cyclotomic ramification valuations and defect formulas for fixed
point theories of Morava E-theory under finite cyclic subgroups.

Everything is exact rational arithmetic.  The ambient facts: the
p^n-th cyclotomic extension of the p-adics is totally ramified of
degree p^(n-1)(p-1), the valuation normalized by v(p) = 1 gives
v(zeta - 1) = 1/(p^(n-1)(p-1)) for a primitive root, and a cyclic
subgroup of the endomorphism units of a height-h formal group exists
exactly when that degree divides h.  The defect of the fixed point
theory is then p to the integer h * max v(g - 1) over the nontrivial
subgroup elements.
"""

from fractions import Fraction

from .fgl import PrimeField


def _check_prime(p: int):
    PrimeField(p)  # shares the primality gate
    return p


class CycloElement:
    """A power zeta^k of the chosen primitive p^n-th root of unity."""

    __slots__ = ("p", "n", "k")

    def __init__(self, p: int, n: int, k: int):
        _check_prime(p)
        if n < 1:
            raise ValueError("root order exponent must be at least 1")
        self.p = p
        self.n = n
        self.k = k % p**n

    def __repr__(self):
        return f"CycloElement(zeta_{self.p}^{self.n} power {self.k})"

    def __eq__(self, other):
        return (
            isinstance(other, CycloElement)
            and (self.p, self.n, self.k) == (other.p, other.n, other.k)
        )

    def __hash__(self):
        return hash((self.p, self.n, self.k))


def cyclo_valuation(e: CycloElement) -> Fraction:
    """v(zeta^k - 1) under the normalization v(p) = 1.

    zeta^k is a primitive p^(n-j)-th root for j the p-adic valuation
    of k, and the extension is totally ramified, so the value is
    1/(p^(n-1-j)(p-1)).  k = 0 names the element zero and has no
    finite valuation here.
    """
    if e.k == 0:
        raise ValueError("zeta^k = 1; the difference is zero and has no valuation")
    p, k = e.p, e.k
    j = 0
    while k % p == 0:
        k //= p
        j += 1
    return Fraction(1, p ** (e.n - 1 - j) * (p - 1))


def embedding_admissible(degree: int, height: int) -> bool:
    """Whether a p-adic field of the given degree embeds into the
    endomorphism division algebra at the given height: the degree must
    divide the height."""
    if degree < 1 or height < 1:
        raise ValueError("degree and height must be positive")
    return height % degree == 0


class SubgroupSpec:
    """A cyclic group of order p^m acting on a height-h formal group.

    With no explicit table the group is taken to be generated by a
    primitive p^m-th root of unity inside the endomorphism algebra,
    which exists exactly when p^(m-1)(p-1) divides the height, and the
    element valuations come from cyclo_valuation.  A user-supplied
    table maps nontrivial element labels to positive rationals whose
    denominators divide p^(m-1)(p-1).
    """

    __slots__ = ("p", "m", "height", "valuations")

    def __init__(self, p: int, m: int, height: int, valuations=None):
        _check_prime(p)
        if m < 0:
            raise ValueError("the order exponent must be nonnegative")
        if height < 1:
            raise ValueError("height must be positive")
        self.p = p
        self.m = m
        self.height = height
        if m == 0:
            self.valuations = {}
            return
        ramification = p ** (m - 1) * (p - 1)
        if not embedding_admissible(ramification, height):
            raise ValueError(
                f"no embedding: the cyclotomic degree {ramification} does not "
                f"divide the height {height}"
            )
        if valuations is None:
            valuations = {
                k: cyclo_valuation(CycloElement(p, m, k)) for k in range(1, p**m)
            }
        else:
            for label, nu in valuations.items():
                if not isinstance(nu, Fraction) or nu <= 0:
                    raise ValueError(f"valuation of {label!r} must be a positive rational")
                if ramification % nu.denominator:
                    raise ValueError(
                        f"valuation {nu} of {label!r} has denominator outside "
                        f"the ramification index {ramification}"
                    )
            valuations = dict(valuations)
        self.valuations = valuations

    @property
    def order(self) -> int:
        return self.p**self.m

    def __repr__(self):
        return f"SubgroupSpec(C_{self.order} at height {self.height})"


def group_N(G: SubgroupSpec) -> int:
    """height * max element valuation, certified to be an integer.

    The Serre divisibility and the denominator bound on the table make
    the product integral for every constructible spec; the check stays
    as a tripwire for tables built by hand.
    """
    if not G.valuations:
        raise ValueError(
            "the trivial group has no elements away from the identity; "
            "its fixed points are complex orientable with defect 1"
        )
    value = G.height * max(G.valuations.values())
    if value.denominator != 1:
        raise ValueError(f"N = {value} is not an integer; the table is inconsistent")
    return int(value)


def eo_defect(G: SubgroupSpec) -> dict:
    """The defect p^N of the fixed point theory, with its p-logarithm.

    The trivial group gives complex orientable fixed points: defect 1,
    logarithm 0, no N.
    """
    if not G.valuations:
        return {
            "p": G.p,
            "order": 1,
            "height": G.height,
            "N": None,
            "phi": 1,
            "phi_p": 0,
        }
    N = group_N(G)
    return {
        "p": G.p,
        "order": G.order,
        "height": G.height,
        "N": N,
        "phi": G.p**N,
        "phi_p": N,
    }


def defect_table(specs) -> str:
    """TSV table of defects, one row per subgroup spec."""
    lines = ["p\tgroup\theight\tN\tphi\tphi_p"]
    for G in specs:
        row = eo_defect(G)
        n_col = "-" if row["N"] is None else str(row["N"])
        lines.append(
            f"{row['p']}\tC_{row['order']}\t{row['height']}\t"
            f"{n_col}\t{row['phi']}\t{row['phi_p']}"
        )
    return "\n".join(lines) + "\n"
