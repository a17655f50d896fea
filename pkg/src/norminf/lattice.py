"""Subgroup lattice of a cyclic group, realised as the divisor lattice.

A cyclic group of order m = p1^m1 * ... * pn^mn has one subgroup per divisor
of m, so a subgroup is an exponent vector e with 0 <= e[i] <= m[i].  The
subgroup order is divisibility, i.e. componentwise <= on exponent vectors;
meet and join are componentwise min and max.  When every multiplicity is 1
(squarefree order) the lattice is the n-dimensional cube.

Everything here is deterministic: divisors are sorted lexicographically by
exponent vector, and the strictly comparable pairs are sorted by
(source index, target index).  That fixed pair order is the coordinate
system for the bit-vector encoding used by the rest of the package, so it
must never change between runs or versions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod

from .errors import GroupSpecError, IntervalError, NotSquarefreeError

_SYMBOLIC_LETTERS = "pqrstuvwxyz"


def _is_prime(k: int) -> bool:
    if k < 2:
        return False
    if k % 2 == 0:
        return k == 2
    f = 3
    while f * f <= k:
        if k % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class GroupSpec:
    """A cyclic group given by its prime factorisation.

    ``primes`` is a nonempty tuple of (prime, multiplicity) with the primes
    strictly increasing and every multiplicity >= 1.  Only the multiset of
    multiplicities affects any computation; the prime values are labels for
    naming subgroups in output.
    """

    primes: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.primes:
            raise GroupSpecError("prime factorisation must be nonempty")
        prev = 1
        for p, m in self.primes:
            if not _is_prime(p):
                raise GroupSpecError(f"{p} is not prime")
            if p == prev:
                raise GroupSpecError(f"duplicate prime {p}")
            if p < prev:
                raise GroupSpecError("primes must be strictly increasing")
            if m < 1:
                raise GroupSpecError(f"multiplicity of {p} must be >= 1")
            prev = p

    @property
    def n(self) -> int:
        """Number of distinct primes."""
        return len(self.primes)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(m for _, m in self.primes)

    @property
    def order(self) -> int:
        return prod(p**m for p, m in self.primes)

    def squarefree(self) -> bool:
        return all(m == 1 for _, m in self.primes)

    def __str__(self) -> str:
        return ",".join(f"{p}^{m}" if m > 1 else str(p) for p, m in self.primes)


def parse_group_spec(text: str) -> GroupSpec:
    """Parse a comma-separated prime-power string, e.g. ``2,3,5`` or ``2^2,3``.

    Factors may be given in any order; they are sorted by prime, and the
    sorted order is what fixes the exponent-vector coordinates.
    """
    factors = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            raise GroupSpecError(f"empty factor in group spec {text!r}")
        base, sep, exp = token.partition("^")
        try:
            p = int(base)
            m = int(exp) if sep else 1
        except ValueError:
            raise GroupSpecError(f"cannot parse factor {token!r}") from None
        factors.append((p, m))
    factors.sort()
    return GroupSpec(tuple(factors))


@dataclass(frozen=True)
class Subgroup:
    """A subgroup, identified by its exponent vector (one slot per prime).

    The all-zero vector is the trivial subgroup; the full multiplicity
    vector is the whole group.
    """

    exponents: tuple[int, ...]

    def rank(self) -> int:
        """Length of a maximal chain from the trivial subgroup up to here."""
        return sum(self.exponents)

    def support(self) -> tuple[int, ...]:
        """Indices of the primes actually dividing the subgroup order."""
        return tuple(i for i, e in enumerate(self.exponents) if e)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.exponents)) + ")"


@dataclass(frozen=True)
class Arrow:
    """An ordered pair of subgroups with the source strictly below the target."""

    source: Subgroup
    target: Subgroup

    def __post_init__(self) -> None:
        s, t = self.source.exponents, self.target.exponents
        if len(s) != len(t):
            raise ValueError("arrow endpoints have different prime counts")
        if s == t or not all(a <= b for a, b in zip(s, t)):
            raise ValueError(f"arrow source must be strictly below target: {s} -> {t}")

    def __str__(self) -> str:
        return f"{self.source} -> {self.target}"


@dataclass(frozen=True)
class IntervalEmbedding:
    """Maps an interval sub-lattice back into its parent lattice.

    ``divisor_map[i]`` is the parent divisor index of the sub-lattice's
    divisor i, and ``pair_map[k]`` the parent pair index of its pair k.
    """

    parent: "Lattice"
    sub: "Lattice"
    divisor_map: tuple[int, ...]
    pair_map: tuple[int, ...]

    def embed_subgroup(self, h: Subgroup) -> Subgroup:
        return self.parent.divisors[self.divisor_map[self.sub.divisor_index[h]]]

    def embed_arrow(self, a: Arrow) -> Arrow:
        return self.parent.pairs[self.pair_map[self.sub.pair_index[a]]]


class Lattice:
    """The divisor lattice of a cyclic group, with canonical indexing.

    Immutable after construction and safe to share between threads.  Holds
    the sorted divisor list, the order predicate, meet/join tables, and the
    canonical list of strictly comparable pairs together with bit-level
    lookup tables (arrows out of / into each divisor) used by the
    enumeration engines.
    """

    __slots__ = (
        "spec",
        "n",
        "divisors",
        "divisor_index",
        "pairs",
        "pair_index",
        "top",
        "bottom",
        "_meet_idx",
        "_join_idx",
        "_src",
        "_tgt",
        "_arrows_from",
        "_arrows_into",
        "_pair_bit",
        "_extras",
    )

    def __init__(self, spec: GroupSpec):
        self.spec = spec
        self.n = spec.n
        mults = spec.multiplicities
        self.divisors = tuple(
            Subgroup(e) for e in itertools.product(*[range(m + 1) for m in mults])
        )
        self.divisor_index = {d: i for i, d in enumerate(self.divisors)}
        self.bottom = self.divisors[0]
        self.top = self.divisors[-1]

        ndiv = len(self.divisors)
        self._meet_idx = [[0] * ndiv for _ in range(ndiv)]
        self._join_idx = [[0] * ndiv for _ in range(ndiv)]
        for i, a in enumerate(self.divisors):
            for j, b in enumerate(self.divisors):
                lo = tuple(map(min, a.exponents, b.exponents))
                hi = tuple(map(max, a.exponents, b.exponents))
                self._meet_idx[i][j] = self.divisor_index[Subgroup(lo)]
                self._join_idx[i][j] = self.divisor_index[Subgroup(hi)]

        # itertools.product over lexicographically sorted divisors emits
        # them in index order, and componentwise <= implies lex <=, so the
        # nested loop below already yields pairs sorted by (source, target).
        pairs = []
        for i, a in enumerate(self.divisors):
            for j in range(i + 1, ndiv):
                b = self.divisors[j]
                if all(x <= y for x, y in zip(a.exponents, b.exponents)):
                    pairs.append(Arrow(a, b))
        self.pairs = tuple(pairs)
        self.pair_index = {a: k for k, a in enumerate(self.pairs)}

        self._src = tuple(self.divisor_index[a.source] for a in self.pairs)
        self._tgt = tuple(self.divisor_index[a.target] for a in self.pairs)
        self._arrows_from = [0] * ndiv
        self._arrows_into = [0] * ndiv
        self._pair_bit: dict[tuple[int, int], int] = {}
        for k in range(len(self.pairs)):
            si, ti = self._src[k], self._tgt[k]
            self._arrows_from[si] |= 1 << k
            self._arrows_into[ti] |= 1 << k
            self._pair_bit[(si, ti)] = 1 << k
        # scratch space for caches other modules attach (rule tables etc.)
        self._extras: dict[str, object] = {}

    # -- basic queries ----------------------------------------------------

    def __contains__(self, h: Subgroup) -> bool:
        return h in self.divisor_index

    def _check_member(self, h: Subgroup) -> int:
        try:
            return self.divisor_index[h]
        except (KeyError, TypeError):
            raise ValueError(f"subgroup {h} is not in this lattice") from None

    def squarefree(self) -> bool:
        return self.spec.squarefree()

    def leq(self, a: Subgroup, b: Subgroup) -> bool:
        """Subgroup containment: a <= b componentwise."""
        self._check_member(a)
        self._check_member(b)
        return all(x <= y for x, y in zip(a.exponents, b.exponents))

    def meet(self, a: Subgroup, b: Subgroup) -> Subgroup:
        """Greatest lower bound (subgroup intersection)."""
        return self.divisors[self._meet_idx[self._check_member(a)][self._check_member(b)]]

    def join(self, a: Subgroup, b: Subgroup) -> Subgroup:
        """Least upper bound (subgroup generated by the union)."""
        return self.divisors[self._join_idx[self._check_member(a)][self._check_member(b)]]

    def complement(self, h: Subgroup) -> Subgroup:
        """The subgroup on the complementary prime set (squarefree only).

        This is an order-reversing involution of the cube; it is the vertex
        relabelling used by the duality map on transfer systems.
        """
        if not self.squarefree():
            raise NotSquarefreeError("complement is defined only on squarefree lattices")
        self._check_member(h)
        return Subgroup(tuple(1 - e for e in h.exponents))

    # -- intervals ---------------------------------------------------------

    def interval(self, bottom: Subgroup, top: Subgroup) -> tuple["Lattice", IntervalEmbedding]:
        """The sub-lattice of subgroups H with bottom <= H <= top.

        Returns the interval as a divisor lattice in its own right (exponent
        vectors reindexed to the primes where top exceeds bottom) plus the
        embedding of its divisors and pairs into this lattice.  A one-point
        interval (bottom == top) has no group spec and is rejected.
        """
        self._check_member(bottom)
        self._check_member(top)
        if not all(x <= y for x, y in zip(bottom.exponents, top.exponents)):
            raise IntervalError(f"interval endpoints not nested: {bottom} !<= {top}")
        if bottom == top:
            raise IntervalError("interval is a single point; no lattice to build")
        kept = [
            i for i, (lo, hi) in enumerate(zip(bottom.exponents, top.exponents)) if hi > lo
        ]
        sub_spec = GroupSpec(
            tuple(
                (self.spec.primes[i][0], top.exponents[i] - bottom.exponents[i])
                for i in kept
            )
        )
        sub = Lattice(sub_spec)

        def lift(h: Subgroup) -> Subgroup:
            e = list(bottom.exponents)
            for pos, i in enumerate(kept):
                e[i] += h.exponents[pos]
            return Subgroup(tuple(e))

        divisor_map = tuple(self.divisor_index[lift(d)] for d in sub.divisors)
        pair_map = tuple(
            self.pair_index[Arrow(lift(a.source), lift(a.target))] for a in sub.pairs
        )
        return sub, IntervalEmbedding(self, sub, divisor_map, pair_map)

    # -- naming ------------------------------------------------------------

    def name(self, h: Subgroup, symbolic: bool = False) -> str:
        """Display name of a subgroup: concrete ("C_12") or symbolic ("C_{p^2q}")."""
        self._check_member(h)
        if all(e == 0 for e in h.exponents):
            return "1"
        if not symbolic:
            order = prod(p**e for (p, _), e in zip(self.spec.primes, h.exponents))
            return f"C_{order}"
        parts = []
        for i, e in enumerate(h.exponents):
            if e == 0:
                continue
            letter = (
                _SYMBOLIC_LETTERS[i] if self.n <= len(_SYMBOLIC_LETTERS) else f"p{i + 1}"
            )
            parts.append(letter if e == 1 else f"{letter}^{e}")
        body = "".join(parts)
        return f"C_{body}" if len(body) == 1 else f"C_{{{body}}}"

    def __repr__(self) -> str:
        return f"Lattice({self.spec}, {len(self.divisors)} divisors, {len(self.pairs)} pairs)"


def build_lattice(spec: GroupSpec | str) -> Lattice:
    """Build the divisor lattice for a group spec (or spec string)."""
    if isinstance(spec, str):
        spec = parse_group_spec(spec)
    return Lattice(spec)
