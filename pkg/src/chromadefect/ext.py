"""Cobar-complex Ext over profile quotients of the dual Steenrod algebra.

The reduced cobar complex of a quotient family B with coefficients in a
finite comodule M has C^{s,t} spanned by words [a_1|...|a_s]m with a_i
positive-degree basis monomials of B and deg(a_1...a_s) + deg(m) = t.
The differential alternates coface insertions of the reduced diagonal,
with position-only signs:

    d[a_1|...|a_s]m = sum_i (-1)^i [a_1|...|psi-bar(a_i)|...|a_s]m
                    + (-1)^{s+1} [a_1|...|a_s|b]m'

Internal degree t is preserved, so Ext^{s,t} is exact for every t below
the cap even when the family itself is infinite.  Products are cobar
concatenation, which satisfies the Leibniz rule with the cohomological
sign, making named-class bookkeeping sound.
"""

from concurrent.futures import ThreadPoolExecutor

from .gradedlin import (
    PrimeFieldMatrix,
    SparseEchelonGF2,
    SubquotientBasis,
    vec_from_terms,
    vec_is_zero,
    vec_support,
)
from .steenrod import Comodule, cotensor_comodule, tau_gen, xi_gen

__all__ = [
    "CobarComplex",
    "ExtChart",
    "ext_ranks",
    "ext_products",
    "evenness_scan",
    "ScanReport",
    "change_of_rings_check",
    "cobar_letters",
    "profile_key",
    "comodule_key",
]


# above this source-dim * target-dim product, dense bitmask elimination
# would need hundreds of MB; stream the rank through the sparse kernel
_SPARSE_CUTOVER = 500_000_000


def profile_key(profile):
    """Stable hashable identity of a profile, for cache keys."""
    tau = profile.tau
    if isinstance(tau, frozenset):
        tau = tuple(sorted(tau))
    return (profile.p, profile.heights, profile.tail, tau, profile.even_only)


def comodule_key(module):
    """Stable hashable identity of a finite comodule."""
    rows = []
    for name in module.names:
        terms = tuple(
            (str(m), c, t) for m, c, t in module.coaction[name]
        )
        rows.append((name, module.degree_of[name], terms))
    return (module.p, tuple(rows))


class CobarComplex:
    """Reduced cobar complex through (s_max, t_max)."""

    def __init__(self, profile, module, s_max, t_max):
        if s_max < 0 or t_max < 0:
            raise ValueError("caps must be nonnegative")
        self.profile = profile
        self.p = profile.p
        self.s_max = s_max
        self.t_max = t_max
        if module.p != profile.p:
            raise ValueError("prime mismatch")
        # the coaction must land in this family; revalidating under the
        # target profile catches coactions that do not factor through it
        if profile_key(module.profile) != profile_key(profile):
            basis = [(n, module.degree_of[n]) for n in module.names]
            module = Comodule(profile, basis, module.coaction)
        self.module = module
        self._letters = list(profile.positive_basis(t_max))
        # rank table reproducing string order on letters, so word sorts
        # compare small ints instead of formatting monomials
        self._letter_rank = {
            m: r for r, m in enumerate(sorted(self._letters, key=str))
        }
        self._words = {}
        self._index = {}
        self._diff = {}
        self._ranks = {}

    # basis ------------------------------------------------------------

    def words(self, s, t):
        """Sorted cobar words in bidegree (s, t)."""
        key = (s, t)
        got = self._words.get(key)
        if got is not None:
            return got
        out = []
        if s == 0:
            for name in self.module.names:
                if self.module.degree_of[name] == t:
                    out.append(((), name))
        elif s > 0 and t >= s:
            degs = [m.degree() for m in self._letters]

            def rec(idx_left, budget, acc):
                if idx_left == 0:
                    for name in self.module.names:
                        if self.module.degree_of[name] == budget:
                            out.append((tuple(acc), name))
                    return
                for i, a in enumerate(self._letters):
                    d = degs[i]
                    # leave at least 1 per remaining slot
                    if d > budget - (idx_left - 1):
                        continue
                    acc.append(a)
                    rec(idx_left - 1, budget - d, acc)
                    acc.pop()

            rec(s, t, [])
        # same order as sorting by monomial strings: within a cell all
        # words have s letters, so comparison is elementwise
        rank = self._letter_rank
        out.sort(key=lambda w: ([rank[m] for m in w[0]], w[1]))
        self._words[key] = out
        self._index[key] = {w: i for i, w in enumerate(out)}
        return out

    def dim_cell(self, s, t):
        return len(self.words(s, t))

    def differential_matrix(self, s, t):
        """Matrix of d: C^{s,t} -> C^{s+1,t} (rows = source words)."""
        key = (s, t)
        got = self._diff.get(key)
        if got is not None:
            return got
        src = self.words(s, t)
        tgt_index = self._index_for(s + 1, t)
        terms = []
        for row, word in enumerate(src):
            for tword, coef in self._d_word(word):
                col = tgt_index.get(tword)
                if col is None:
                    raise AssertionError("differential left the computed window")
                terms.append((row, col, coef))
        mat = PrimeFieldMatrix.from_terms(
            self.p, len(src), max(len(tgt_index), 1), terms
        )
        self._diff[key] = mat
        return mat

    def differential_rank(self, s, t):
        """Rank of d: C^{s,t} -> C^{s+1,t}, without dense rows when the
        cell pair is too large for bitmask elimination."""
        key = (s, t)
        got = self._ranks.get(key)
        if got is not None:
            return got
        n_src = self.dim_cell(s, t)
        n_tgt = self.dim_cell(s + 1, t)
        if n_src == 0 or n_tgt == 0:
            r = 0
        elif self.p == 2 and n_src * n_tgt > _SPARSE_CUTOVER:
            r = self._sparse_rank(s, t)
        else:
            r = self.differential_matrix(s, t).rank()
        self._ranks[key] = r
        return r

    def _sparse_rank(self, s, t):
        tgt_index = self._index_for(s + 1, t)
        n = len(tgt_index)
        ech = SparseEchelonGF2(n)
        add = ech.add_row
        for word in self.words(s, t):
            # reversed column order: the lex-largest target words are the
            # rarest, so leading there keeps echelon fill-in near zero
            cols = sorted(n - 1 - c for c in self._d_cols(word, tgt_index))
            add(cols)
        return ech.rank

    def _d_cols(self, word, tgt_index):
        """Support of d(word) as a set of target columns, p = 2 only.

        Hashes each generated word once; at p = 2 repeats cancel in
        pairs, so the support is a plain toggle set.
        """
        letters, name = word
        acc = set()
        diagonal = self.profile.reduced_diagonal
        for i, a in enumerate(letters):
            pre = letters[:i]
            post = letters[i + 1 :]
            for left, right, _ in diagonal(a):
                col = tgt_index[(pre + (left, right) + post, name)]
                if col in acc:
                    acc.remove(col)
                else:
                    acc.add(col)
        for mono, _, target in self.module.coaction[name]:
            if mono.is_unit():
                continue
            col = tgt_index[(letters + (mono,), target)]
            if col in acc:
                acc.remove(col)
            else:
                acc.add(col)
        return acc

    def release_column(self, t):
        """Drop cached words and matrices at internal degree t.

        Ranks stay cached, so dimension queries remain cheap; anything
        else recomputes on demand.
        """
        for cache in (self._words, self._index, self._diff):
            for key in [k for k in cache if k[1] == t]:
                del cache[key]

    def _index_for(self, s, t):
        self.words(s, t)
        return self._index[(s, t)]

    def _d_word(self, word):
        """Differential of one word as [(word, coef)] with repeats summed."""
        letters, name = word
        p = self.p
        s = len(letters)
        acc = {}

        def add(w, c):
            c %= p
            if not c:
                return
            cur = (acc.get(w, 0) + c) % p
            if cur:
                acc[w] = cur
            else:
                acc.pop(w, None)

        for i, a in enumerate(letters):
            sign = -1 if (i + 1) % 2 else 1
            for left, right, c in self.profile.reduced_diagonal(a):
                w = letters[:i] + (left, right) + letters[i + 1 :]
                add((w, name), sign * c)
        sign = -1 if (s + 1) % 2 else 1
        for mono, c, target in self.module.coaction[name]:
            if mono.is_unit():
                continue
            add((letters + (mono,), target), sign * c)
        return list(acc.items())

    # homology ----------------------------------------------------------

    def ext_dim(self, s, t):
        cycles = self.dim_cell(s, t) - self.differential_rank(s, t)
        if s == 0:
            return cycles
        return cycles - self.differential_rank(s - 1, t)

    def cell_basis(self, s, t):
        """SubquotientBasis of Ext^{s,t} inside the word coordinates."""
        kern = self.differential_matrix(s, t).kernel_vectors()
        if s == 0:
            image = []
        else:
            image = list(self.differential_matrix(s - 1, t).rows)
        return SubquotientBasis(self.p, len(self.words(s, t)), image, kern)

    def verify_d_squared(self, t_values=None):
        """d^2 = 0 on whole columns; raises on failure."""
        ts = t_values if t_values is not None else range(self.t_max + 1)
        for t in ts:
            for s in range(0, min(self.s_max, t) + 1):
                a = self.differential_matrix(s, t)
                b = self.differential_matrix(s + 1, t)
                for row in a.rows:
                    if not vec_is_zero(b.apply(row)):
                        raise AssertionError(f"d^2 != 0 at (s,t)=({s},{t})")
        return True


class ExtChart:
    """Bigraded Ext dims with named classes and recorded products."""

    def __init__(self, p, label, s_max, t_max):
        self.p = p
        self.label = label
        self.s_max = s_max
        self.t_max = t_max
        self.dims = {}
        self.names = {}
        self.collisions = []
        self.products = {}

    def dim(self, s, t):
        return self.dims.get((s, t), 0)

    def cells(self):
        return sorted(self.dims)

    def nonzero_cells(self):
        return sorted(k for k, v in self.dims.items() if v)

    def stem_dims(self, stem):
        return {
            s: d for (s, t), d in self.dims.items() if t - s == stem and d
        }

    def to_tsv(self):
        lines = [
            f"# ext chart: {self.label}",
            f"# window: s <= {self.s_max}, t <= {self.t_max}",
            "s\tt\tstem\tdim\tclass-names",
        ]
        rows = []
        for (s, t), d in self.dims.items():
            if not d:
                continue
            names = ";".join(n for n, _ in self.names.get((s, t), ()))
            rows.append((t - s, s, t, d, names))
        rows.sort()
        for stem, s, t, d, names in rows:
            lines.append(f"{s}\t{t}\t{stem}\t{d}\t{names}")
        return "\n".join(lines) + "\n"


def cobar_letters(profile, t_max):
    """Named degree-one cocycles: h(i,j) for primitive xi_i^{p^j} and
    a(i) for primitive tau_i, through internal degree t_max."""
    p = profile.p
    letters = []
    i = 1
    while True:
        base = xi_gen(p, i)
        if base.degree() > t_max:
            break
        j = 0
        while True:
            mono = xi_gen(p, i, p**j)
            if mono.degree() > t_max:
                break
            if profile.allows(mono) and not profile.reduced_diagonal(mono):
                letters.append((f"h({i},{j})", mono))
            j += 1
        i += 1
    if p != 2:
        t = 0
        while tau_gen(p, t).degree() <= t_max:
            mono = tau_gen(p, t)
            if profile.allows(mono) and not profile.reduced_diagonal(mono):
                letters.append((f"a({t})", mono))
            t += 1
    return letters


def _letter_products(letters, s, t):
    """Multisets of s letters with total degree t, sorted canonically."""
    out = []

    def rec(idx, left, budget, acc):
        if left == 0:
            if budget == 0:
                out.append(tuple(acc))
            return
        if idx == len(letters):
            return
        d = letters[idx][1].degree()
        c = 0
        while c <= left and c * d <= budget:
            rec(idx + 1, left - c, budget - c * d, acc + [idx] * c)
            c += 1

    rec(0, s, t, [])
    return sorted(out)


def _multiset_name(letters, multiset):
    parts = []
    k = 0
    while k < len(multiset):
        j = k
        while j < len(multiset) and multiset[j] == multiset[k]:
            j += 1
        name = letters[multiset[k]][0]
        e = j - k
        parts.append(name if e == 1 else f"{name}^{e}")
        k = j
    return "*".join(parts) if parts else "1"


def ext_ranks(profile, module, s_max, t_max, workers=1, with_names=True):
    """Ext^{s,t} dims over a profile quotient, as an ExtChart.

    Columns (fixed t) are independent; workers > 1 evaluates them
    concurrently with a deterministic merge.
    """
    complexes = CobarComplex(profile, module, s_max, t_max)
    chart = ExtChart(
        profile.p,
        f"Ext over {profile!r}",
        s_max,
        t_max,
    )

    def column(t):
        col = [(s, complexes.ext_dim(s, t)) for s in range(0, min(s_max, t) + 1)]
        if not with_names:
            # dims-only runs never revisit the words, and the big columns
            # hold millions of them
            complexes.release_column(t)
        return col

    ts = list(range(t_max + 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(column, ts))
    else:
        results = [column(t) for t in ts]
    for t, col in zip(ts, results):
        for s, d in col:
            if d:
                chart.dims[(s, t)] = d
    if with_names:
        _attach_names(chart, complexes)
    chart._complex = complexes
    return chart


def _attach_names(chart, complexes):
    letters = cobar_letters(complexes.profile, complexes.t_max)
    if not letters:
        return
    module = complexes.module
    # letter products are only meaningful against a degree-0 cell of M
    base_cells = [n for n in module.names if module.degree_of[n] == 0]
    if not base_cells:
        return
    base = base_cells[0]
    for (s, t) in chart.cells():
        if not chart.dims[(s, t)]:
            continue
        combos = _letter_products(letters, s, t)
        if not combos:
            continue
        basis = complexes.cell_basis(s, t)
        if basis.dim == 0:
            continue
        index = complexes._index_for(s, t)
        seen = {}
        named = []
        for multiset in combos:
            word = (tuple(letters[i][1] for i in multiset), base)
            col = index.get(word)
            if col is None:
                continue
            try:
                coords = basis.coords(
                    vec_from_terms(chart.p, len(index), [(col, 1)])
                )
            except ValueError:
                # not a cocycle against this cell (nontrivial coaction)
                continue
            if not coords:
                continue
            key = tuple(sorted(coords.items()))
            name = _multiset_name(letters, multiset)
            if key in seen:
                chart.collisions.append((seen[key], name, (s, t)))
                continue
            seen[key] = name
            named.append((name, key))
        if named:
            chart.names[(s, t)] = named


def ext_products(chart, letter_name):
    """Record multiplication by a named degree-one cocycle on the chart.

    For every nonzero cell (s,t) with representatives, computes the
    concatenation product into (s+1, t+dt) and stores the coordinate
    map under chart.products[(letter_name, (s,t))].
    """
    complexes = chart._complex
    letters = dict(cobar_letters(complexes.profile, complexes.t_max))
    if letter_name not in letters:
        raise ValueError(f"{letter_name!r} is not a named cocycle letter here")
    mono = letters[letter_name]
    dt = mono.degree()
    p = chart.p
    for (s, t) in chart.cells():
        if s + 1 > chart.s_max or t + dt > chart.t_max:
            continue
        src_basis = complexes.cell_basis(s, t)
        if src_basis.dim == 0:
            continue
        tgt_basis = complexes.cell_basis(s + 1, t + dt)
        tgt_index = complexes._index_for(s + 1, t + dt)
        rows = []
        for rep in src_basis.reps:
            out_terms = []
            for col, c in vec_support(p, rep, len(complexes.words(s, t))):
                word, name = complexes.words(s, t)[col]
                target_word = ((mono,) + word, name)
                # left concatenation by a single letter
                j = tgt_index.get(target_word)
                if j is None:
                    raise AssertionError("product left the window")
                out_terms.append((j, c))
            vec = vec_from_terms(p, len(tgt_index), out_terms)
            rows.append(tgt_basis.coords(vec))
        chart.products[(letter_name, (s, t))] = ((s + 1, t + dt), rows)
    return chart


class ScanReport:
    """Result of an evenness obstruction scan."""

    def __init__(self, offenders, stems_scanned, s_range, warning=None):
        self.offenders = offenders
        self.stems_scanned = stems_scanned
        self.s_range = s_range
        self.warning = warning

    def is_empty(self):
        return not self.offenders

    def __repr__(self):
        state = "empty" if self.is_empty() else f"{len(self.offenders)} offenders"
        return f"ScanReport({state}, stems={self.stems_scanned}, s={self.s_range})"


def obstruction_stems(p, n, stem_max):
    """Stems 2p^{m+1} - 3 - 2(p-1)k for m >= n, k >= 0, within range.

    Once the leading stem of a family exceeds the window, the family
    only repeats residues already present, so the loop stops there.
    """
    stems = set()
    m = n
    while True:
        top = 2 * p ** (m + 1) - 3
        k = 0
        while True:
            stem = top - 2 * (p - 1) * k
            if stem < 0:
                break
            if stem <= stem_max:
                stems.add(stem)
            k += 1
        if top > stem_max:
            break
        m += 1
    return sorted(stems)


def evenness_scan(n, p, module, stem_max, s_max=None, workers=1):
    """Scan Ext over the exterior height-n family for classes in the
    obstruction bidegrees (s >= 2).  Empty = certified through stem_max.

    A nonempty result lists candidates only, never a disproof.  The
    module is restricted to the exterior family if given over a larger
    quotient.
    """
    from .steenrod import Profile

    family = Profile.E(p, n)
    if profile_key(module.profile) != profile_key(family):
        module = module.restrict(family)
    if s_max is None:
        # letter degrees grow with n; capping s keeps word counts sane
        s_max = 8 if n <= 1 else 5
    stems = obstruction_stems(p, n, stem_max)
    if not stems:
        return ScanReport([], [], (2, s_max), warning="window below every obstruction stem")
    t_max = stem_max + s_max
    chart = ext_ranks(family, module, s_max, t_max, workers=workers, with_names=False)
    offenders = []
    stem_set = set(stems)
    for (s, t), d in sorted(chart.dims.items()):
        stem = t - s
        if s >= 2 and d and stem in stem_set:
            offenders.append((s, stem))
    return ScanReport(offenders, stems, (2, s_max))


def change_of_rings_check(outer, inner, module, s_max, t_max, workers=1):
    """Ext_inner(F_p, M) vs Ext_outer(F_p, cotensor) through the caps.

    Returns (equal, inner_dims, outer_dims).
    """
    inner_chart = ext_ranks(inner, module, s_max, t_max, workers=workers, with_names=False)
    coinduced = cotensor_comodule(outer, inner, module, t_max)
    outer_chart = ext_ranks(outer, coinduced, s_max, t_max, workers=workers, with_names=False)
    return (
        inner_chart.dims == outer_chart.dims,
        inner_chart.dims,
        outer_chart.dims,
    )
