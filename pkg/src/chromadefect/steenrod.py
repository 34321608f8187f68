"""Dual Steenrod algebra in the Milnor basis, with profile quotients.

Dual monomials are products of polynomial generators xi_i and, at odd
primes, exterior generators tau_t.  At p = 2 the degree of xi_i is
2^i - 1; at odd p the degrees are |xi_i| = 2(p^i - 1) and
|tau_t| = 2 p^t - 1.  Quotient families are described by a height
function: height h at index i imposes xi_i^{p^h} = 0 (h = None means no
relation), together with a set of surviving tau indices at odd primes.
Even-only families (the p = 2 sub-Hopf-algebras generated by the
squares xi_i^2) reuse the same monomial type with the evenness
constraint enforced by the profile.

The operator side (Milnor basis of the Steenrod algebra itself) lives
at the bottom of the module: basis elements Q_E P(R) and their product
by Milnor's matrix formula.  The dual pairing between the two sides is
exercised by the test suite as a cross check.
"""

from functools import lru_cache
from math import comb

__all__ = [
    "DualMonomial",
    "Profile",
    "Comodule",
    "MilnorBasisElement",
    "milnor_product",
    "operator_basis",
    "sq",
    "milnor_p",
    "milnor_q",
    "conjugate_xi",
    "conjugate_tau",
    "conjugate_xi_power",
    "coproduct",
    "reduced_coproduct",
    "element_coproduct",
    "elt_mul",
    "elt_scale",
    "elt_add_term",
    "xi_gen",
    "tau_gen",
    "cotensor_comodule",
    "cofree_decompose",
    "family_margolis_indices",
    "margolis_vanishing_report",
    "dual_operation_matrix",
    "relative_dual_coalgebra",
    "polynomial_series",
    "poincare_identity_check",
    "splitting_generator_degrees",
    "stable_splitting_generator_degrees",
    "parse_monomial",
]


# ---------------------------------------------------------------------------
# dual monomials


class DualMonomial:
    """Monomial xi_1^{e_1} ... xi_k^{e_k} * tau_{t_1} ... tau_{t_r}.

    xi: tuple of exponents, index i-1 storing the exponent of xi_i,
    trailing zeros stripped.  tau: strictly increasing tuple of indices
    (always empty at p = 2).
    """

    __slots__ = ("p", "xi", "tau", "_degree", "_hash", "_str")

    def __init__(self, p, xi=(), tau=()):
        xi = tuple(xi)
        while xi and xi[-1] == 0:
            xi = xi[:-1]
        if any(e < 0 for e in xi):
            raise ValueError("negative exponent")
        tau = tuple(tau)
        if tuple(sorted(set(tau))) != tau:
            raise ValueError("tau indices must be strictly increasing")
        if p == 2 and tau:
            raise ValueError("no tau generators at p = 2")
        self.p = p
        self.xi = xi
        self.tau = tau
        self._degree = None
        self._hash = None
        self._str = None

    def degree(self):
        if self._degree is None:
            p = self.p
            if p == 2:
                d = sum(e * (2 ** (i + 1) - 1) for i, e in enumerate(self.xi))
            else:
                d = sum(2 * e * (p ** (i + 1) - 1) for i, e in enumerate(self.xi))
                d += sum(2 * p**t - 1 for t in self.tau)
            self._degree = d
        return self._degree

    def parity(self):
        return len(self.tau) & 1

    def is_unit(self):
        return not self.xi and not self.tau

    def exponent(self, i):
        """Exponent of xi_i (1-indexed)."""
        return self.xi[i - 1] if i - 1 < len(self.xi) else 0

    def times(self, other):
        """Product with Koszul sign; returns (coef, monomial) or (0, None)."""
        if self.p != other.p:
            raise ValueError("prime mismatch")
        n = max(len(self.xi), len(other.xi))
        xi = tuple(self.exponent(i + 1) + other.exponent(i + 1) for i in range(n))
        if set(self.tau) & set(other.tau):
            return 0, None
        inversions = sum(1 for a in self.tau for b in other.tau if a > b)
        tau = tuple(sorted(self.tau + other.tau))
        return (-1) ** inversions, DualMonomial(self.p, xi, tau)

    def __eq__(self, other):
        return (
            isinstance(other, DualMonomial)
            and self.p == other.p
            and self.xi == other.xi
            and self.tau == other.tau
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, self.xi, self.tau))
        return self._hash

    def __lt__(self, other):
        return (self.degree(), str(self)) < (other.degree(), str(other))

    def __str__(self):
        if self._str is None:
            parts = []
            for i, e in enumerate(self.xi):
                if e == 1:
                    parts.append(f"xi{i + 1}")
                elif e:
                    parts.append(f"xi{i + 1}^{e}")
            parts.extend(f"tau{t}" for t in self.tau)
            self._str = "*".join(parts) if parts else "1"
        return self._str

    def __repr__(self):
        return f"DualMonomial({self.p}, {self})"


def parse_monomial(p, text):
    """Inverse of str(DualMonomial): 'xi1^2*tau0' and '1' forms."""
    text = text.strip()
    if text == "1":
        return DualMonomial(p)
    xi = {}
    tau = []
    for factor in text.split("*"):
        factor = factor.strip()
        if factor.startswith("xi"):
            body = factor[2:]
            if "^" in body:
                idx, _, exp = body.partition("^")
                xi[int(idx)] = xi.get(int(idx), 0) + int(exp)
            else:
                xi[int(body)] = xi.get(int(body), 0) + 1
        elif factor.startswith("tau"):
            tau.append(int(factor[3:]))
        else:
            raise ValueError(f"cannot parse monomial factor {factor!r}")
    n = max(xi) if xi else 0
    return DualMonomial(p, tuple(xi.get(i + 1, 0) for i in range(n)), tuple(sorted(tau)))


def xi_gen(p, i, power=1):
    return DualMonomial(p, (0,) * (i - 1) + (power,))


def tau_gen(p, t):
    return DualMonomial(p, (), (t,))


# elements are dicts {DualMonomial: coefficient mod p}


def elt_add_term(p, acc, mono, coef):
    coef %= p
    if not coef:
        return
    cur = (acc.get(mono, 0) + coef) % p
    if cur:
        acc[mono] = cur
    else:
        acc.pop(mono, None)


def elt_mul(p, x, y):
    out = {}
    for ma, ca in x.items():
        for mb, cb in y.items():
            sign, m = ma.times(mb)
            if sign:
                elt_add_term(p, out, m, sign * ca * cb)
    return out


def elt_scale(p, x, c):
    c %= p
    if not c:
        return {}
    return {m: (c * v) % p for m, v in x.items()}


# ---------------------------------------------------------------------------
# coproduct

def _xi_coproduct_terms(p, k):
    """psi(xi_k) = sum xi_{k-i}^{p^i} (x) xi_i, with xi_0 = 1."""
    unit = DualMonomial(p)
    out = []
    for i in range(k + 1):
        left = xi_gen(p, k - i, p**i) if k - i else unit
        right = xi_gen(p, i) if i else unit
        out.append((left, right))
    return out


def _tau_coproduct_terms(p, k):
    """psi(tau_k) = tau_k (x) 1 + sum_i xi_{k-i}^{p^i} (x) tau_i."""
    unit = DualMonomial(p)
    out = [(tau_gen(p, k), unit)]
    for i in range(k + 1):
        left = xi_gen(p, k - i, p**i) if k - i else unit
        out.append((left, tau_gen(p, i)))
    return out


def _tensor_add(p, acc, key, coef):
    coef %= p
    if not coef:
        return
    cur = (acc.get(key, 0) + coef) % p
    if cur:
        acc[key] = cur
    else:
        acc.pop(key, None)


def _tensor_mul(p, x, y):
    """Product in B (x) B with the Koszul sign (-1)^{|aR| |bL|}."""
    out = {}
    for (al, ar), ca in x.items():
        for (bl, br), cb in y.items():
            sl, left = al.times(bl)
            if not sl:
                continue
            sr, right = ar.times(br)
            if not sr:
                continue
            koszul = -1 if (ar.parity() and bl.parity()) else 1
            _tensor_add(p, out, (left, right), ca * cb * sl * sr * koszul)
    return out


def _multinomial(p, parts):
    total = 0
    acc = 1
    for c in parts:
        total += c
        acc = acc * comb(total, c) % p
        if not acc:
            return 0
    return acc


def _xi_power_coproduct(p, k, e, reduce_pair=None):
    """psi(xi_k^e) expanded with multinomial coefficients.

    reduce_pair: optional hook returning None to discard a tensor term.
    """
    basis_terms = _xi_coproduct_terms(p, k)
    out = {}

    def rec(idx, remaining, left, right, parts):
        if idx == len(basis_terms):
            if remaining:
                return
            coef = _multinomial(p, parts)
            if coef:
                key = (left, right)
                if reduce_pair is None or reduce_pair(key):
                    _tensor_add(p, out, key, coef)
            return
        tl, tr = basis_terms[idx]
        for c in range(remaining + 1):
            if c:
                _, nl = left.times(DualMonomial(p, tuple(x * c for x in tl.xi)))
                _, nr = right.times(DualMonomial(p, tuple(x * c for x in tr.xi)))
            else:
                nl, nr = left, right
            rec(idx + 1, remaining - c, nl, nr, parts + [c])

    unit = DualMonomial(p)
    rec(0, e, unit, unit, [])
    return out


def coproduct(mono, profile=None):
    """Full Milnor diagonal of a dual monomial, optionally reduced.

    Returns {(left, right): coef}.  With a profile, terms with a factor
    killed by the profile are dropped.
    """
    p = mono.p
    keep = None
    if profile is not None:
        def keep(key):
            return profile.allows(key[0]) and profile.allows(key[1])

    unit = DualMonomial(p)
    acc = {(unit, unit): 1}
    for i, e in enumerate(mono.xi):
        if not e:
            continue
        factor = _xi_power_coproduct(p, i + 1, e, keep)
        acc = _tensor_mul(p, acc, factor)
        if keep is not None:
            acc = {k: v for k, v in acc.items() if keep(k)}
    for t in mono.tau:
        factor = {}
        for left, right in _tau_coproduct_terms(p, t):
            _tensor_add(p, factor, (left, right), 1)
        acc = _tensor_mul(p, acc, factor)
        if keep is not None:
            acc = {k: v for k, v in acc.items() if keep(k)}
    return acc


def reduced_coproduct(mono, profile=None):
    """Diagonal minus the two primitive-forcing terms m(x)1 and 1(x)m."""
    p = mono.p
    unit = DualMonomial(p)
    out = dict(coproduct(mono, profile))
    for key in ((mono, unit), (unit, mono)):
        cur = (out.get(key, 0) - 1) % p
        if cur:
            out[key] = cur
        else:
            out.pop(key, None)
    return out


def element_coproduct(elt, profile=None):
    p = next(iter(elt)).p if elt else 2
    out = {}
    for mono, coef in elt.items():
        for key, c in coproduct(mono, profile).items():
            _tensor_add(p, out, key, c * coef)
    return out


# ---------------------------------------------------------------------------
# conjugation


@lru_cache(maxsize=None)
def conjugate_xi(p, k):
    """chi(xi_k) as an element dict, from sum xi_{k-i}^{p^i} chi(xi_i) = 0."""
    if k == 0:
        return {DualMonomial(p): 1}
    acc = {}
    for i in range(k):
        factor = {xi_gen(p, k - i, p**i): 1}
        for m, c in elt_mul(p, factor, conjugate_xi(p, i)).items():
            elt_add_term(p, acc, m, -c)
    return acc


@lru_cache(maxsize=None)
def conjugate_tau(p, k):
    """chi(tau_k) from tau_k + sum_{i<=k} xi_{k-i}^{p^i} chi(tau_i) = 0."""
    acc = {tau_gen(p, k): -1}
    for i in range(k):
        factor = {xi_gen(p, k - i, p**i): 1}
        for m, c in elt_mul(p, factor, conjugate_tau(p, i)).items():
            elt_add_term(p, acc, m, -c)
    return acc


def conjugate_xi_power(p, k, e):
    out = {DualMonomial(p): 1}
    base = conjugate_xi(p, k)
    for _ in range(e):
        out = elt_mul(p, out, base)
    return out


# ---------------------------------------------------------------------------
# profiles


def _le(a, b):
    """Height comparison where None means infinity."""
    if b is None:
        return True
    if a is None:
        return False
    return a <= b


class Profile:
    """Quotient family of the dual Steenrod algebra.

    heights: explicit heights for xi_1, xi_2, ...; tail: the height of
    every later generator (0 kills it, None leaves it free).  tau is
    'all', or an iterable of surviving indices, or None at p = 2.
    even_only marks the p = 2 sub-Hopf-families generated by squares.
    """

    def __init__(self, p, heights=(), tail=None, tau=None, even_only=False, label=None):
        self.p = p
        self.heights = tuple(heights)
        if tail not in (0, None):
            raise ValueError("tail height must be 0 or None")
        self.tail = tail
        if p == 2:
            if tau not in (None, frozenset(), ()):
                raise ValueError("tau data requires an odd prime")
            self.tau = None
        else:
            if tau == "all":
                self.tau = "all"
            else:
                self.tau = frozenset(tau or ())
        self.even_only = bool(even_only)
        if even_only and p != 2:
            raise ValueError("even-only families only arise at p = 2")
        self.label = label
        self._validate()
        self._basis_cache = {}
        self._coproduct_cache = {}

    # family constructors -------------------------------------------------

    @classmethod
    def full(cls, p):
        """The whole dual Steenrod algebra."""
        tau = "all" if p != 2 else None
        return cls(p, (), None, tau, label=f"A({p})*")

    @classmethod
    def T(cls, p, n):
        """Dual algebra of the X(p^n) Thom quotient: first n polynomial
        generators become exterior (p = 2) or die (p odd)."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        if p == 2:
            return cls(p, (1,) * n, None, label=f"T({n})-quotient,p=2")
        return cls(p, (0,) * n, None, "all", label=f"T({n})-quotient,p={p}")

    @classmethod
    def A(cls, p, n):
        """Dual of the subalgebra generated by the first n+1 Steenrod
        power operations (and the Bockstein at odd p)."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        if p == 2:
            return cls(p, tuple(n + 2 - i for i in range(1, n + 2)), 0, label=f"A({n})*,p=2")
        heights = tuple(n + 1 - i for i in range(1, n + 1))
        return cls(p, heights, 0, frozenset(range(n + 1)), label=f"A({n})*,p={p}")

    @classmethod
    def E(cls, p, n):
        """Exterior family: E(xi_1..xi_{n+1}) at p = 2, E(tau_0..tau_n) odd."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        if p == 2:
            return cls(p, (1,) * (n + 1), 0, label=f"E({n})*,p=2")
        return cls(p, (0,), 0, frozenset(range(n + 1)), label=f"E({n})*,p={p}")

    @classmethod
    def P(cls, p, n):
        """Polynomial family: duals of the quotients by the Bockstein
        ideal; at p = 2 the even sub-family on xi_i^2."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        heights = tuple(n + 2 - i for i in range(1, n + 2))
        if p == 2:
            return cls(p, heights, 0, even_only=True, label=f"P({n})*,p=2")
        return cls(p, heights, 0, frozenset(), label=f"P({n})*,p={p}")

    @classmethod
    def P_full(cls, p):
        if p == 2:
            return cls(p, (), None, even_only=True, label="P*,p=2")
        return cls(p, (), None, frozenset(), label=f"P*,p={p}")

    # structure ------------------------------------------------------------

    def height(self, i):
        if i <= 0:
            raise ValueError("generator indices start at 1")
        if i <= len(self.heights):
            return self.heights[i - 1]
        return self.tail

    def tau_allowed(self, t):
        if self.p == 2:
            return False
        if self.tau == "all":
            return True
        return t in self.tau

    def _validate(self):
        """Closure of the defining ideal under the Milnor diagonal.

        For xi_i^{p^h} = 0 every diagonal term xi_{i-j}^{p^{j+h}} (x)
        xi_j^{p^h} must die on one side; same shape for killed tau_t.
        """
        finite = [h for h in self.heights if h is not None]
        max_h = max(finite, default=0)
        bound = len(self.heights) + max_h + 2
        for i in range(1, bound + 1):
            h = self.height(i)
            if h is None:
                continue
            for j in range(1, i):
                left_dead = _le_num(self.height(i - j), j + h)
                right_dead = _le_num(self.height(j), h)
                if not (left_dead or right_dead):
                    raise ValueError(
                        f"heights do not define a coideal: xi_{i}^{{p^{h}}} "
                        f"has a surviving diagonal term at j={j}"
                    )
        if self.p != 2 and self.tau != "all":
            tau_bound = bound + max(self.tau, default=0) + 2
            for t in range(tau_bound + 1):
                if self.tau_allowed(t):
                    continue
                for j in range(t):
                    xi_dead = _le_num(self.height(t - j), j)
                    tau_dead = not self.tau_allowed(j)
                    if not (xi_dead or tau_dead):
                        raise ValueError(
                            f"tau set does not define a coideal: killed tau_{t} "
                            f"has a surviving diagonal term at j={j}"
                        )

    def allows(self, mono):
        if mono.p != self.p:
            raise ValueError("prime mismatch")
        for i, e in enumerate(mono.xi):
            if not e:
                continue
            if self.even_only:
                # heights cap powers of the squared generator xi_i^2
                if e % 2:
                    return False
                e //= 2
            h = self.height(i + 1)
            if h is not None and e >= self.p**h:
                return False
        for t in mono.tau:
            if not self.tau_allowed(t):
                return False
        return True

    def reduce(self, mono):
        """Image of an ambient monomial in the quotient: mono or None."""
        if self.even_only:
            if any(e % 2 for e in mono.xi):
                raise ValueError("monomial lies outside the even sub-family")
        return mono if self.allows(mono) else None

    def reduce_element(self, elt):
        return {m: c for m, c in elt.items() if self.allows(m)}

    def is_quotient_of(self, other):
        """True when self kills at least everything other kills."""
        if self.p != other.p or self.even_only != other.even_only:
            return False
        span = max(len(self.heights), len(other.heights)) + 1
        for i in range(1, span + 1):
            if not _le(self.height(i), other.height(i)):
                return False
        if self.p != 2:
            if other.tau == "all":
                return True
            if self.tau == "all":
                return False
            return self.tau <= other.tau
        return True

    # bases ----------------------------------------------------------------

    def generator_list(self, max_degree):
        """Algebra generators of the family with degree <= max_degree."""
        out = []
        step = 2 if self.even_only else 1
        i = 1
        while True:
            g = xi_gen(self.p, i, step)
            if g.degree() > max_degree:
                break
            h = self.height(i)
            if h != 0:
                out.append(g)
            i += 1
        if self.p != 2:
            t = 0
            while 2 * self.p**t - 1 <= max_degree:
                if self.tau_allowed(t):
                    out.append(tau_gen(self.p, t))
                t += 1
        return sorted(out)

    def basis(self, max_degree):
        """All family monomials of degree <= max_degree, sorted."""
        key = max_degree
        if key in self._basis_cache:
            return self._basis_cache[key]
        p = self.p
        step = 2 if self.even_only else 1
        xis = []
        i = 1
        while True:
            g = xi_gen(p, i, step)
            if g.degree() > max_degree:
                break
            h = self.height(i)
            if h != 0:
                cap = None if h is None else p**h
                xis.append((i, g.degree(), cap))
            i += 1
        taus = []
        if p != 2:
            t = 0
            while 2 * p**t - 1 <= max_degree:
                if self.tau_allowed(t):
                    taus.append((t, 2 * p**t - 1))
                t += 1
        found = []

        def rec_tau(idx, chosen, budget):
            if idx == len(taus):
                rec_xi(0, {}, budget, tuple(chosen))
                return
            rec_tau(idx + 1, chosen, budget)
            t, d = taus[idx]
            if d <= budget:
                chosen.append(t)
                rec_tau(idx + 1, chosen, budget - d)
                chosen.pop()

        def rec_xi(idx, exps, budget, tau):
            if idx == len(xis):
                xi = [0] * (max((i for i, _, _ in xis), default=0))
                for i, e in exps.items():
                    xi[i - 1] = e * step
                found.append(DualMonomial(p, tuple(xi), tau))
                return
            i, d, cap = xis[idx]
            e = 0
            while e * d <= budget:
                if cap is not None and e >= cap:
                    break
                if e:
                    exps[i] = e
                rec_xi(idx + 1, exps, budget - e * d, tau)
                exps.pop(i, None)
                e += 1

        rec_tau(0, [], max_degree)
        result = sorted(found)
        self._basis_cache[key] = result
        return result

    def positive_basis(self, max_degree):
        return [m for m in self.basis(max_degree) if not m.is_unit()]

    def poincare(self, max_degree):
        dims = [0] * (max_degree + 1)
        for m in self.basis(max_degree):
            dims[m.degree()] += 1
        return dims

    def total_dimension(self):
        """Dimension when the family is finite, else None."""
        if self.tail is None:
            return None
        if self.p != 2 and self.tau == "all":
            return None
        total = 1
        for i, h in enumerate(self.heights):
            if h is None:
                return None
            total *= self.p**h
        if self.p != 2:
            total *= 2 ** len(self.tau)
        return total

    def reduced_diagonal(self, mono):
        """Memoized reduced coproduct within the family."""
        got = self._coproduct_cache.get(mono)
        if got is None:
            got = sorted(
                ((l, r, c) for (l, r), c in reduced_coproduct(mono, self).items()),
                key=lambda t: (str(t[0]), str(t[1])),
            )
            self._coproduct_cache[mono] = got
        return got

    def __repr__(self):
        return self.label or (
            f"Profile(p={self.p}, heights={self.heights}, tail={self.tail})"
        )


def _le_num(a, b):
    """a <= b with None (= infinity) handled, b finite."""
    if a is None:
        return False
    return a <= b


# ---------------------------------------------------------------------------
# comodules


class Comodule:
    """Finite left comodule over a profile quotient.

    basis: iterable of (name, degree).  coaction: {name: [(mono, coef,
    target-name), ...]} including the counit term (1, 1, name).  The
    construction validates the counit, grading, and coassociativity.
    """

    def __init__(self, profile, basis, coaction, validate=True):
        self.profile = profile
        self.p = profile.p
        pairs = sorted(((d, n) for n, d in basis))
        self.names = [n for _, n in pairs]
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate basis names")
        self.degree_of = {n: d for d, n in pairs}
        self.coaction = {}
        for name in self.names:
            terms = []
            for mono, coef, target in coaction.get(name, ()):
                coef %= self.p
                if coef:
                    terms.append((mono, coef, target))
            terms.sort(key=lambda t: (str(t[0]), t[2]))
            self.coaction[name] = terms
        if validate:
            self._validate()

    def _validate(self):
        unit = DualMonomial(self.p)
        for name in self.names:
            d = self.degree_of[name]
            unit_terms = []
            for mono, coef, target in self.coaction[name]:
                if target not in self.degree_of:
                    raise ValueError(f"coaction of {name} hits unknown {target}")
                if not self.profile.allows(mono):
                    raise ValueError(f"coaction of {name} uses a killed monomial")
                if mono.degree() + self.degree_of[target] != d:
                    raise ValueError(f"coaction of {name} is not degree-preserving")
                if mono.is_unit():
                    unit_terms.append((coef, target))
            if unit_terms != [(1, name)]:
                raise ValueError(f"counit axiom fails on {name}")
        # coassociativity, checked termwise through the finite basis
        for name in self.names:
            lhs = {}
            rhs = {}
            for mono, coef, target in self.coaction[name]:
                for left, right, c in _family_coproduct_terms(self.profile, mono):
                    k = (left, right, target)
                    _tensor_add(self.p, lhs, k, coef * c)
                for mono2, coef2, target2 in self.coaction[target]:
                    k = (mono, mono2, target2)
                    _tensor_add(self.p, rhs, k, coef * coef2)
            if lhs != rhs:
                raise ValueError(f"coaction is not coassociative at {name}")

    # constructors ----------------------------------------------------------

    @classmethod
    def trivial(cls, profile, degrees=(0,), prefix="m"):
        unit = DualMonomial(profile.p)
        basis = []
        coaction = {}
        for k, d in enumerate(degrees):
            name = f"{prefix}{k}" if len(degrees) > 1 else f"{prefix}0"
            basis.append((name, d))
            coaction[name] = [(unit, 1, name)]
        return cls(profile, basis, coaction)

    @classmethod
    def coalgebra_self(cls, profile, cap):
        """The family itself as a comodule via its diagonal, through
        degree cap (valid because the diagonal never raises degree)."""
        monos = profile.basis(cap)
        names = {m: str(m) for m in monos}
        basis = [(names[m], m.degree()) for m in monos]
        coaction = {}
        for m in monos:
            terms = []
            for (left, right), c in coproduct(m, profile).items():
                terms.append((left, c, names[right]))
            coaction[names[m]] = terms
        return cls(profile, basis, coaction)

    # structure ---------------------------------------------------------

    def dim(self):
        return len(self.names)

    def degrees(self):
        return [self.degree_of[n] for n in self.names]

    def poincare(self, cap=None):
        top = max(self.degrees(), default=0) if cap is None else cap
        dims = [0] * (top + 1)
        for n in self.names:
            if self.degree_of[n] <= top:
                dims[self.degree_of[n]] += 1
        return dims

    def is_even(self):
        return all(d % 2 == 0 for d in self.degree_of.values())

    def has_trivial_coaction(self):
        return all(
            len(terms) == 1 and terms[0][0].is_unit()
            for terms in self.coaction.values()
        )

    def suspend(self, k):
        basis = [(n, self.degree_of[n] + k) for n in self.names]
        return Comodule(self.profile, basis, self.coaction, validate=False)

    def restrict(self, smaller):
        """Corestriction along a further quotient of the coefficient
        family: kill coaction terms whose monomial dies."""
        if not smaller.is_quotient_of(self.profile):
            raise ValueError("target family is not a quotient of the current one")
        coaction = {
            n: [(m, c, t) for m, c, t in terms if smaller.allows(m)]
            for n, terms in self.coaction.items()
        }
        basis = [(n, self.degree_of[n]) for n in self.names]
        return Comodule(smaller, basis, coaction)

    def direct_sum(self, other, rename=True):
        if self.profile is not other.profile and not (
            self.profile.is_quotient_of(other.profile)
            and other.profile.is_quotient_of(self.profile)
        ):
            raise ValueError("summands live over different families")
        left = {n: f"a.{n}" if rename else n for n in self.names}
        right = {n: f"b.{n}" if rename else n for n in other.names}
        basis = [(left[n], self.degree_of[n]) for n in self.names]
        basis += [(right[n], other.degree_of[n]) for n in other.names]
        coaction = {}
        for n in self.names:
            coaction[left[n]] = [(m, c, left[t]) for m, c, t in self.coaction[n]]
        for n in other.names:
            coaction[right[n]] = [(m, c, right[t]) for m, c, t in other.coaction[n]]
        return Comodule(self.profile, basis, coaction, validate=False)

    # serialization -------------------------------------------------------

    def to_json(self):
        return {
            "prime": self.p,
            "basis": [
                {"name": n, "degree": self.degree_of[n]} for n in self.names
            ],
            "coaction": [
                {
                    "on": n,
                    "terms": [
                        {"monomial": str(m), "coef": c, "to": t}
                        for m, c, t in self.coaction[n]
                    ],
                }
                for n in self.names
            ],
        }

    @classmethod
    def from_json(cls, data, profile):
        try:
            p = int(data["prime"])
            if p != profile.p:
                raise ValueError("prime of the data disagrees with the family")
            basis = [(str(b["name"]), int(b["degree"])) for b in data["basis"]]
            coaction = {}
            for row in data["coaction"]:
                terms = [
                    (parse_monomial(p, t["monomial"]), int(t["coef"]), str(t["to"]))
                    for t in row["terms"]
                ]
                coaction[str(row["on"])] = terms
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed comodule data: {exc}") from exc
        return cls(profile, basis, coaction)


def _family_coproduct_terms(profile, mono):
    return [
        (left, right, c)
        for (left, right), c in coproduct(mono, profile).items()
    ]


# ---------------------------------------------------------------------------
# cotensor


def cotensor_comodule(outer, inner, module, cap, prefix="c"):
    """Cotensor product (outer family) box_(inner family) module, through
    total degree cap, as a comodule over the outer family.

    inner must be a further quotient of outer and module a comodule over
    inner.  Basis elements are named {prefix}{degree}_{k}.
    """
    from .gradedlin import PrimeFieldMatrix, vec_entry, vec_from_terms, vec_support

    if not inner.is_quotient_of(outer):
        raise ValueError("inner family must be a quotient of the outer one")
    if module.profile.p != outer.p:
        raise ValueError("prime mismatch")
    p = outer.p
    amb = outer.basis(cap)
    # pairs (a, m) graded by total degree
    pairs_by_deg = {}
    for a in amb:
        for name in module.names:
            d = a.degree() + module.degree_of[name]
            if d <= cap:
                pairs_by_deg.setdefault(d, []).append((a, name))
    for v in pairs_by_deg.values():
        v.sort(key=lambda t: (str(t[0]), t[1]))

    # cotensor condition per degree: (1 (x) pi (x) 1)(psi_B (x) 1) = (1 (x) psi_M)
    kernels = {}
    for d in sorted(pairs_by_deg):
        pairs = pairs_by_deg[d]
        index = {pm: i for i, pm in enumerate(pairs)}
        triples = {}

        def tcol(key):
            if key not in triples:
                triples[key] = len(triples)
            return triples[key]

        rows = []
        for a, name in pairs:
            terms = {}
            for (b1, b2), c in coproduct(a, outer).items():
                if inner.allows(b2):
                    _tensor_add(p, terms, (b1, b2, name), c)
            for mono, c, target in module.coaction[name]:
                _tensor_add(p, terms, (a, mono, target), -c)
            rows.append([(tcol(k), c) for k, c in terms.items()])
        mat = PrimeFieldMatrix.from_terms(
            p,
            len(pairs),
            max(len(triples), 1),
            [(i, j, c) for i, row in enumerate(rows) for j, c in row],
        )
        kern = mat.kernel_vectors()
        if kern:
            kernels[d] = (pairs, index, kern)

    basis = []
    vectors = {}
    for d in sorted(kernels):
        _, _, kern = kernels[d]
        for k, vec in enumerate(kern):
            name = f"{prefix}{d}_{k}"
            basis.append((name, d))
            vectors[name] = (d, vec)

    # coaction: apply psi_B to the left slot and re-express in the kernel basis
    solvers = {}
    for d, (pairs, index, kern) in kernels.items():
        mat = PrimeFieldMatrix(p, len(kern), len(pairs), list(kern))
        solvers[d] = (mat, pairs, index)

    coaction = {}
    for name, (d, vec) in vectors.items():
        pairs, index, _ = kernels[d]
        # accumulate left-monomial -> component vector in lower degree
        by_left = {}
        for i, (a, mname) in enumerate(pairs):
            c0 = vec_entry(p, vec, i)
            if not c0:
                continue
            for (b1, b2), c in coproduct(a, outer).items():
                acc = by_left.setdefault(b1, {})
                key = (b2, mname)
                cur = (acc.get(key, 0) + c0 * c) % p
                if cur:
                    acc[key] = cur
                else:
                    acc.pop(key, None)
        terms = []
        for b1 in sorted(by_left, key=lambda m: (m.degree(), str(m))):
            comp = by_left[b1]
            if not comp:
                continue
            d2 = d - b1.degree()
            if d2 not in solvers:
                raise ValueError("cotensor coaction leaves the computed window")
            mat, pairs2, index2 = solvers[d2]
            target = vec_from_terms(
                p,
                len(pairs2),
                [(index2[key], c) for key, c in comp.items()],
            )
            combo = mat.solve_combo(target)
            if combo is None:
                raise ValueError("cotensor coaction misses the kernel basis")
            for k, c in vec_support(p, combo, mat.nrows):
                terms.append((b1, c, f"{prefix}{d2}_{k}"))
        coaction[name] = terms
    return Comodule(outer, basis, coaction)


# ---------------------------------------------------------------------------
# freeness over finite families via vanishing homology of square-zero duals


def family_margolis_indices(profile):
    """Square-zero dual operations of a finite family.

    Returns (xi_ops, tau_ops): xi_ops is a list of (t, s) pairs meaning
    the operation dual to g_t^{p^s} (g_t = xi_t, or xi_t^2 in the
    even-only case); the square vanishes exactly when s < t.  tau_ops
    lists the exterior indices (odd primes).
    """
    if profile.total_dimension() is None:
        raise ValueError("family must be finite")
    xi_ops = []
    for i, h in enumerate(profile.heights):
        t = i + 1
        for s in range(h):
            if s < t:
                xi_ops.append((t, s))
    tau_ops = []
    if profile.p != 2 and profile.tau != "all":
        tau_ops = sorted(profile.tau)
    return xi_ops, tau_ops


def dual_operation_matrix(module, mono):
    """Matrix (rows = basis order) of the operation dual to a family
    monomial, acting on a comodule by slicing its coaction."""
    names = module.names
    pos = {n: i for i, n in enumerate(names)}
    rows = [[0] * len(names) for _ in names]
    for n in names:
        for m, c, target in module.coaction[n]:
            if m == mono:
                rows[pos[n]][pos[target]] = c
    return rows


def _matrix_homology_dim(p, rows):
    from .gradedlin import PrimeFieldMatrix

    n = len(rows)
    terms = [
        (i, j, rows[i][j]) for i in range(n) for j in range(n) if rows[i][j]
    ]
    mat = PrimeFieldMatrix.from_terms(p, n, n, terms)
    rank = mat.rank()
    return n - 2 * rank


def margolis_vanishing_report(module):
    """Homology dimensions of every square-zero dual operation.

    Returns list of (label, mono, hom_dim).  hom_dim = dim ker - rank;
    zero for all entries is the cofreeness criterion.
    """
    profile = module.profile
    p = profile.p
    xi_ops, tau_ops = family_margolis_indices(profile)
    step = 2 if profile.even_only else 1
    out = []
    for t, s in xi_ops:
        mono = xi_gen(p, t, step * p**s)
        rows = dual_operation_matrix(module, mono)
        _assert_square_zero(p, rows)
        label = f"P({t},{s + 1})" if profile.even_only else f"P({t},{s})"
        out.append((label, mono, _matrix_homology_dim(p, rows)))
    for t in tau_ops:
        mono = tau_gen(p, t)
        rows = dual_operation_matrix(module, mono)
        _assert_square_zero(p, rows)
        out.append((f"Q({t})", mono, _matrix_homology_dim(p, rows)))
    return out


def _assert_square_zero(p, rows):
    n = len(rows)
    for i in range(n):
        for j in range(n):
            v = sum(rows[i][k] * rows[k][j] for k in range(n)) % p
            if v:
                raise ValueError("dual operation does not square to zero")


def cofree_decompose(module):
    """Decide cofreeness of an even comodule over a finite even family.

    Returns (True, sorted cogenerator degrees) or (False, witness) where
    witness names the first operation with nonvanishing homology.
    Cogenerator degrees come from dividing Poincare series.
    """
    profile = module.profile
    if profile.p == 2 and not profile.even_only:
        raise ValueError("expected an even-only family at p = 2")
    if not module.is_even():
        raise ValueError("module must be evenly graded")
    report = margolis_vanishing_report(module)
    for label, mono, hom in report:
        if hom:
            return False, (label, hom)
    fam = profile.poincare(max(module.degrees(), default=0))
    mod = module.poincare()
    cogens = []
    work = list(mod)
    for d in range(len(work)):
        c = work[d]
        if c < 0:
            return False, ("series", d)
        if not c:
            continue
        cogens.extend([d] * c)
        for k, b in enumerate(fam):
            if d + k < len(work):
                work[d + k] -= c * b
    if any(work):
        return False, ("series", "remainder")
    return True, cogens


# ---------------------------------------------------------------------------
# quotient coalgebras relative to a Thom-range ideal


def relative_dual_coalgebra(p, m, cap):
    """Quotient of the dual Steenrod algebra by the Thom-range ideal of
    width m, with its distinguished primitives through degree cap.

    Requires p^n <= m < p^{n+1} for some n >= 0; the quotient is then
    the height-n family.  Returns (profile, basis, primitives) where
    primitives is a list of (power, element, ok) for the reduced
    conjugate-generator powers zeta_{n+1}^{2^{k+1}} (p = 2) or
    zeta_{n+1}^{p^k} (odd p), ok = nonzero and diagonal-primitive.
    """
    if m < 1:
        raise ValueError("width must be at least 1")
    n = 0
    while p ** (n + 1) <= m:
        n += 1
    profile = Profile.T(p, n)
    basis = profile.basis(cap)
    zeta = conjugate_xi(p, n + 1)
    if p == 2:
        base = elt_mul(p, zeta, zeta)
    else:
        base = zeta
    # working in the quotient throughout is valid: reduction is a ring map
    power = profile.reduce_element(base)
    primitives = []
    exp = 1
    while power:
        deg = next(iter(power)).degree()
        if deg > cap:
            break
        cop = {}
        for mono, coef in power.items():
            for (l, r), c in reduced_coproduct(mono, profile).items():
                _tensor_add(p, cop, (l, r), c * coef)
        primitives.append((exp, dict(power), not cop))
        nxt = power
        for _ in range(p - 1):
            nxt = profile.reduce_element(elt_mul(p, nxt, power))
        power = nxt
        exp *= p
    return profile, basis, primitives


# ---------------------------------------------------------------------------
# Poincare series identities


def polynomial_series(gen_degrees, cap):
    """Coefficients of prod 1/(1 - q^d) through degree cap."""
    series = [0] * (cap + 1)
    series[0] = 1
    for d in gen_degrees:
        if d <= 0:
            raise ValueError("generator degrees must be positive")
        for k in range(d, cap + 1):
            series[k] += series[k - d]
    return series


def poincare_identity_check(gens_a, gens_b, cap):
    sa = polynomial_series(sorted(gens_a), cap)
    sb = polynomial_series(sorted(gens_b), cap)
    return sa == sb, sa, sb


def splitting_generator_degrees(p, n, m):
    """Generator degrees for the finite Thom splitting: the width-m
    homology against the height-n family plus polynomial complement.

    Valid for p^n <= m < p^{n+1}; returns (lhs, rhs) degree lists.
    """
    if not (p**n <= m < p ** (n + 1)):
        raise ValueError("width is not in the height-n range")
    lhs = [2 * i for i in range(1, m)]
    family = [2 * (p**j - 1) for j in range(1, n + 1)]
    skips = {p**j - 1 for j in range(1, n + 1)}
    complement = [2 * i for i in range(1, m) if i not in skips]
    return lhs, family + complement


def stable_splitting_generator_degrees(p, n, m):
    """Degreewise form of the stable splitting of the width filtration:
    height-m family against height-n family with adjoined classes in
    degrees 2(p^i - 1), n < i <= m."""
    if not 0 <= n <= m:
        raise ValueError("need 0 <= n <= m")
    lhs = [2 * (p**j - 1) for j in range(1, m + 1)]
    rhs = [2 * (p**j - 1) for j in range(1, n + 1)]
    rhs += [2 * (p**i - 1) for i in range(n + 1, m + 1)]
    return lhs, rhs


# ---------------------------------------------------------------------------
# operator side: Milnor basis of the Steenrod algebra


class MilnorBasisElement:
    """Q_{e_1}..Q_{e_k} P(r_1, r_2, ...) in the Milnor basis.

    At p = 2 the exterior part is empty and P(R) means Sq(R).
    """

    __slots__ = ("p", "q", "r", "_hash")

    def __init__(self, p, q=(), r=()):
        r = tuple(r)
        while r and r[-1] == 0:
            r = r[:-1]
        q = tuple(q)
        if tuple(sorted(set(q))) != q:
            raise ValueError("exterior indices must be strictly increasing")
        if p == 2 and q:
            raise ValueError("no exterior part at p = 2")
        if any(x < 0 for x in r) or any(e < 0 for e in q):
            raise ValueError("negative entries")
        self.p = p
        self.q = q
        self.r = r
        self._hash = None

    def degree(self):
        p = self.p
        if p == 2:
            return sum(e * (2 ** (i + 1) - 1) for i, e in enumerate(self.r))
        d = sum(2 * e * (p ** (i + 1) - 1) for i, e in enumerate(self.r))
        return d + sum(2 * p**e - 1 for e in self.q)

    def parity(self):
        return len(self.q) & 1

    def is_unit(self):
        return not self.q and not self.r

    def dual_monomial(self):
        return DualMonomial(self.p, self.r, self.q)

    def __eq__(self, other):
        return (
            isinstance(other, MilnorBasisElement)
            and (self.p, self.q, self.r) == (other.p, other.q, other.r)
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, self.q, self.r))
        return self._hash

    def __lt__(self, other):
        return (self.degree(), str(self)) < (other.degree(), str(other))

    def __str__(self):
        if self.p == 2:
            return "Sq(" + ",".join(map(str, self.r)) + ")" if self.r else "1"
        parts = []
        if self.q:
            parts.append("Q(" + ",".join(map(str, self.q)) + ")")
        if self.r:
            parts.append("P(" + ",".join(map(str, self.r)) + ")")
        return " ".join(parts) if parts else "1"

    def __repr__(self):
        return f"MilnorBasisElement({self.p}, {self})"


def sq(*r):
    return MilnorBasisElement(2, (), r)


def milnor_p(p, *r):
    return MilnorBasisElement(p, (), r)


def milnor_q(p, *e):
    return MilnorBasisElement(p, tuple(sorted(e)), ())


def _p_part_products(p, R, S):
    """Milnor matrix expansion of P(R) P(S): yields (coef, T)."""
    rows = len(R)
    cols = len(S)
    results = []
    # x[i][j] for 1 <= i <= rows, 0 <= j <= cols, row sums sum_j p^j x = r_i
    x = [[0] * (cols + 1) for _ in range(rows)]

    def rec_row(i):
        if i == rows:
            finish()
            return
        target = R[i]

        # fill columns cols..1 then dump the rest in column 0
        def rec_col0(j, remaining):
            if j == 0:
                x[i][0] = remaining
                rec_row(i + 1)
                x[i][0] = 0
                return
            unit = p**j
            c = 0
            while c * unit <= remaining:
                x[i][j] = c
                rec_col0(j - 1, remaining - c * unit)
                c += 1
            x[i][j] = 0

        rec_col0(cols, target)

    def finish():
        # top margin x[0][j] = s_j - column sums
        top = []
        for j in range(1, cols + 1):
            used = sum(x[i][j] for i in range(rows))
            v = S[j - 1] - used
            if v < 0:
                return
            top.append(v)
        coef = 1
        T = []
        for k in range(1, rows + cols + 1):
            diag = []
            if 1 <= k <= cols:
                diag.append(top[k - 1])
            for i in range(1, rows + 1):
                j = k - i
                if 0 <= j <= cols:
                    diag.append(x[i - 1][j])
            coef = coef * _multinomial(p, diag) % p
            if not coef:
                return
            T.append(sum(diag))
        while T and T[-1] == 0:
            T.pop()
        results.append((coef, tuple(T)))

    rec_row(0)
    return results


def milnor_product(a, b):
    """Product of two Milnor basis elements: {MilnorBasisElement: coef}.

    Sign convention: this is the dual of the diagonal under the
    unsigned tensor pairing <a (x) b, x' (x) x''> = a(x') b(x''); every
    Koszul sign lives on the coalgebra side.  The usual relations hold:
    exterior generators anticommute, the Bockstein squares to zero, and
    Q_{k+1} = P(p^k) Q_k - Q_k P(p^k).
    """
    if a.p != b.p:
        raise ValueError("prime mismatch")
    p = a.p
    out = {}
    if p == 2:
        for coef, T in _p_part_products(p, a.r, b.r):
            key = MilnorBasisElement(p, (), T)
            cur = (out.get(key, 0) + coef) % p
            if cur:
                out[key] = cur
            else:
                out.pop(key, None)
        return out
    # move each exterior factor of b leftwards through P(a.r):
    # P(R) Q_f = sum_j Q_{f+j} P(R - p^f e_j), the j = 0 term leaving R alone
    states = [(1, tuple(a.q), a.r)]
    for f in b.q:
        nxt = []
        for coef, qs, R in states:
            for j in range(len(R) + 1):
                if j == 0:
                    nxt.append((coef, qs + (f,), R))
                    continue
                need = p**f
                if R[j - 1] >= need:
                    R2 = list(R)
                    R2[j - 1] -= need
                    while R2 and R2[-1] == 0:
                        R2.pop()
                    nxt.append((coef, qs + (f + j,), tuple(R2)))
        states = nxt
    for coef, qs, R in states:
        if len(set(qs)) != len(qs):
            continue
        sign = 1
        seq = list(qs)
        # parity of the sort
        inv = sum(
            1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j]
        )
        if inv & 1:
            sign = -1
        qsorted = tuple(sorted(seq))
        for c2, T in _p_part_products(p, R, b.r):
            key = MilnorBasisElement(p, qsorted, T)
            cur = (out.get(key, 0) + sign * coef * c2) % p
            if cur:
                out[key] = cur
            else:
                out.pop(key, None)
    return out


def operator_basis(profile):
    """Milnor basis of the finite subalgebra dual to a profile quotient."""
    if profile.even_only:
        raise ValueError("even-only families have no separate operator basis here")
    dim = profile.total_dimension()
    if dim is None:
        raise ValueError("family must be finite")
    out = [
        MilnorBasisElement(profile.p, m.tau, m.xi)
        for m in _finite_family_monomials(profile)
    ]
    assert len(out) == dim
    return sorted(out)


def _finite_family_monomials(profile):
    p = profile.p
    caps = [p**h for h in profile.heights]
    exps = [[]]
    for c in caps:
        exps = [e + [k] for e in exps for k in range(c)]
    taus = sorted(profile.tau) if (p != 2 and profile.tau != "all") else []
    subsets = [[]]
    for t in taus:
        subsets = subsets + [s + [t] for s in subsets]
    for e in exps:
        for s in subsets:
            yield DualMonomial(p, tuple(e), tuple(s))
