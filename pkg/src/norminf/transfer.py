"""Transfer systems: arrow sets closed under transitivity and restriction.

A transfer system on a subgroup lattice is a set X of arrows H -> K
(H strictly below K) such that

  * (transitivity)  H -> K in X and K -> L in X imply H -> L in X;
  * (restriction)   H -> K in X and any subgroup L with H^L != K^L imply
                    H^L -> K^L in X, where ^ is subgroup intersection.

Identity arrows are never stored: restriction instances with
H^L == K^L contribute nothing.  A system is encoded as a fixed-width bit
vector over the lattice's canonical pair order, so set operations are
integer bit operations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import IntervalError, LatticeMismatchError
from .lattice import Arrow, Lattice, Subgroup, build_lattice, parse_group_spec

_TABLE_KEY = "transfer.rule_tables"


def _rule_tables(lat: Lattice) -> tuple[list[int], list[tuple[int, int, int]]]:
    """One-step consequence tables for the two axioms, cached per lattice.

    Returns (restriction_masks, transitivity_triples): restriction_masks[i]
    is the bit mask of every arrow forced by arrow i alone; the triples
    (i, j, c) list each composable pair with its composite.  Because the
    intersection of two divisors is a divisor, the one-step restriction
    set of an arrow is already closed under further restriction.
    """
    cached = lat._extras.get(_TABLE_KEY)
    if cached is not None:
        return cached
    npairs = len(lat.pairs)
    restr = [0] * npairs
    for i, ar in enumerate(lat.pairs):
        si = lat.divisor_index[ar.source]
        ti = lat.divisor_index[ar.target]
        mask = 0
        for lj in range(len(lat.divisors)):
            s2 = lat._meet_idx[si][lj]
            t2 = lat._meet_idx[ti][lj]
            if s2 != t2:
                mask |= lat._pair_bit[(s2, t2)]
        restr[i] = mask & ~(1 << i)
    triples = []
    for i in range(npairs):
        for j in range(npairs):
            if lat._tgt[i] == lat._src[j]:
                triples.append((i, j, lat._pair_bit[(lat._src[i], lat._tgt[j])].bit_length() - 1))
    tables = (restr, triples)
    lat._extras[_TABLE_KEY] = tables
    return tables


class TransferSystem:
    """An immutable transfer system: a lattice plus a member bit vector.

    Bit k of ``members`` is set exactly when ``lattice.pairs[k]`` belongs to
    the system.  The constructor checks only that the bits are in range;
    use :meth:`from_arrows` to build from raw arrows with the axioms
    verified, or :func:`closure` to complete an arbitrary arrow set.
    """

    __slots__ = ("lattice", "members")

    def __init__(self, lattice: Lattice, members: int):
        if not 0 <= members < (1 << len(lattice.pairs)):
            raise ValueError("member bit vector out of range for this lattice")
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "members", members)

    def __setattr__(self, *_):
        raise AttributeError("TransferSystem is immutable")

    @classmethod
    def empty(cls, lattice: Lattice) -> "TransferSystem":
        return cls(lattice, 0)

    @classmethod
    def full(cls, lattice: Lattice) -> "TransferSystem":
        return cls(lattice, (1 << len(lattice.pairs)) - 1)

    @classmethod
    def from_arrows(cls, lattice: Lattice, arrows: Iterable[Arrow]) -> "TransferSystem":
        """Build from arrows, verifying both axioms (raises ValueError if violated)."""
        mask = _arrows_to_mask(lattice, arrows)
        report = check(lattice, mask)
        if report is not None:
            raise ValueError(f"arrow set is not a transfer system: {report}")
        return cls(lattice, mask)

    def arrows(self) -> tuple[Arrow, ...]:
        return tuple(a for k, a in enumerate(self.lattice.pairs) if (self.members >> k) & 1)

    def __iter__(self) -> Iterator[Arrow]:
        return iter(self.arrows())

    def __len__(self) -> int:
        return bin(self.members).count("1")

    def __contains__(self, arrow: Arrow) -> bool:
        k = self.lattice.pair_index.get(arrow)
        return k is not None and bool((self.members >> k) & 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransferSystem):
            return NotImplemented
        return self.lattice.spec == other.lattice.spec and self.members == other.members

    def __hash__(self) -> int:
        return hash((self.lattice.spec, self.members))

    def __le__(self, other: "TransferSystem") -> bool:
        _require_same_lattice(self, other)
        return self.members & ~other.members == 0

    def __repr__(self) -> str:
        return f"TransferSystem({self.lattice.spec}, 0x{to_hex(self)})"


def _require_same_lattice(t1: TransferSystem, t2: TransferSystem) -> None:
    if t1.lattice.spec != t2.lattice.spec:
        raise LatticeMismatchError(
            f"systems live on different lattices: {t1.lattice.spec} vs {t2.lattice.spec}"
        )


def _arrows_to_mask(lattice: Lattice, arrows) -> int:
    if isinstance(arrows, TransferSystem):
        if arrows.lattice.spec != lattice.spec:
            raise LatticeMismatchError(
                f"system lives on {arrows.lattice.spec}, not {lattice.spec}"
            )
        return arrows.members
    if isinstance(arrows, int):
        if not 0 <= arrows < (1 << len(lattice.pairs)):
            raise ValueError("member bit vector out of range for this lattice")
        return arrows
    mask = 0
    for a in arrows:
        k = lattice.pair_index.get(a)
        if k is None:
            raise ValueError(f"arrow {a} is not in this lattice")
        mask |= 1 << k
    return mask


# -- axiom checking ---------------------------------------------------------


@dataclass(frozen=True)
class ViolationReport:
    """Witnesses for a failed axiom.

    For ``kind == "restriction"``: ``arrows`` holds the single offending
    arrow, ``subgroup`` the intersecting L, and ``missing`` the absent
    restricted arrow.  For ``kind == "transitivity"``: ``arrows`` holds the
    two composable arrows and ``missing`` their absent composite.
    """

    kind: str
    arrows: tuple[Arrow, ...]
    missing: Arrow
    subgroup: Subgroup | None = None

    def __str__(self) -> str:
        if self.kind == "restriction":
            return (
                f"restriction violated: {self.arrows[0]} intersected with "
                f"{self.subgroup} needs {self.missing}"
            )
        return (
            f"transitivity violated: {self.arrows[0]} then {self.arrows[1]} "
            f"needs {self.missing}"
        )


def is_transfer_system(lattice: Lattice, arrows) -> bool:
    """Fast predicate: do the given arrows satisfy both axioms?

    ``arrows`` may be a TransferSystem, a raw member bit vector, or an
    iterable of Arrows.
    """
    mask = _arrows_to_mask(lattice, arrows)
    restr, triples = _rule_tables(lattice)
    m = mask
    while m:
        low = m & -m
        m ^= low
        if restr[low.bit_length() - 1] & ~mask:
            return False
    for i, j, c in triples:
        if (mask >> i) & 1 and (mask >> j) & 1 and not (mask >> c) & 1:
            return False
    return True


def check(lattice: Lattice, arrows) -> ViolationReport | None:
    """Check both axioms; return None if they hold, else the first violation.

    The scan order is deterministic: arrows in canonical pair order; for
    each arrow first its restriction instances (intersecting subgroup in
    divisor order), then the transitivity instances in which it is the
    first leg (second leg in canonical pair order).
    """
    mask = _arrows_to_mask(lattice, arrows)
    if is_transfer_system(lattice, mask):
        return None
    meet_idx = lattice._meet_idx
    for i, ar in enumerate(lattice.pairs):
        if not (mask >> i) & 1:
            continue
        si, ti = lattice._src[i], lattice._tgt[i]
        for lj in range(len(lattice.divisors)):
            s2 = meet_idx[si][lj]
            t2 = meet_idx[ti][lj]
            if s2 == t2:
                continue
            bit = lattice._pair_bit[(s2, t2)]
            if not mask & bit:
                return ViolationReport(
                    kind="restriction",
                    arrows=(ar,),
                    subgroup=lattice.divisors[lj],
                    missing=lattice.pairs[bit.bit_length() - 1],
                )
        for j in range(len(lattice.pairs)):
            if not (mask >> j) & 1 or lattice._src[j] != ti:
                continue
            bit = lattice._pair_bit[(si, lattice._tgt[j])]
            if not mask & bit:
                return ViolationReport(
                    kind="transitivity",
                    arrows=(ar, lattice.pairs[j]),
                    missing=lattice.pairs[bit.bit_length() - 1],
                )
    raise AssertionError("fast and exhaustive axiom scans disagree")


# -- closure ----------------------------------------------------------------


def closure(lattice: Lattice, arrows) -> TransferSystem:
    """Smallest transfer system containing the given arrows.

    Round-based fixed point of the two axioms read as inference rules;
    each round adds every one-step consequence, and the set of transfer
    systems is intersection-closed so the least fixed point exists.
    """
    mask = _arrows_to_mask(lattice, arrows)
    restr, triples = _rule_tables(lattice)
    while True:
        new = mask
        m = mask
        while m:
            low = m & -m
            m ^= low
            new |= restr[low.bit_length() - 1]
        for i, j, c in triples:
            if (new >> i) & 1 and (new >> j) & 1:
                new |= 1 << c
        if new == mask:
            return TransferSystem(lattice, mask)
        mask = new


# -- restriction to an interval ----------------------------------------------


def restrict(t: TransferSystem, bottom: Subgroup, top: Subgroup) -> TransferSystem:
    """The induced system on the interval [bottom, top].

    Members are exactly the arrows of ``t`` with both endpoints between
    bottom and top, re-encoded on the interval's own lattice.  Both axioms
    survive restriction, so the result is again a transfer system.
    """
    if bottom == top:
        raise IntervalError("cannot restrict to a single point")
    sub, emb = t.lattice.interval(bottom, top)
    mask = 0
    for k, parent_k in enumerate(emb.pair_map):
        if (t.members >> parent_k) & 1:
            mask |= 1 << k
    return TransferSystem(sub, mask)


# -- lattice operations on systems --------------------------------------------


def meet_ts(t1: TransferSystem, t2: TransferSystem) -> TransferSystem:
    """Intersection of two transfer systems (their greatest lower bound).

    Both axioms are universally quantified implications, so an intersection
    of systems is again a system; the test suite verifies this exhaustively
    rather than assuming it.
    """
    _require_same_lattice(t1, t2)
    return TransferSystem(t1.lattice, t1.members & t2.members)


def join_ts(t1: TransferSystem, t2: TransferSystem) -> TransferSystem:
    """Closure of the union of two transfer systems (their least upper bound)."""
    _require_same_lattice(t1, t2)
    return closure(t1.lattice, t1.members | t2.members)


# -- serialisation ------------------------------------------------------------


def hex_width(lattice: Lattice) -> int:
    return (len(lattice.pairs) + 3) // 4


def to_hex(t: TransferSystem) -> str:
    """Fixed-width lowercase hex encoding of the member bit vector."""
    return format(t.members, f"0{hex_width(t.lattice)}x")


def from_hex(lattice: Lattice, text: str) -> TransferSystem:
    text = text.strip()
    if len(text) != hex_width(lattice):
        raise ValueError(
            f"hex encoding must be exactly {hex_width(lattice)} digits for this lattice"
        )
    try:
        members = int(text, 16)
    except ValueError:
        raise ValueError(f"invalid hex encoding {text!r}") from None
    return TransferSystem(lattice, members)


def to_json_dict(t: TransferSystem) -> dict:
    """JSON payload: group spec string plus arrows in canonical pair order."""
    return {
        "group": str(t.lattice.spec),
        "arrows": [
            [list(a.source.exponents), list(a.target.exponents)] for a in t.arrows()
        ],
    }


def to_json(t: TransferSystem) -> str:
    return json.dumps(to_json_dict(t))


def arrows_from_json_dict(payload: dict, lattice: Lattice | None = None) -> tuple[Lattice, list[Arrow]]:
    """Decode a ``{"group": ..., "arrows": ...}`` payload to raw arrows.

    Arrows are accepted in any order; writers always emit canonical order.
    If ``lattice`` is given, the payload's group must match its spec.
    """
    if not isinstance(payload, dict) or "group" not in payload or "arrows" not in payload:
        raise ValueError("payload must be an object with 'group' and 'arrows'")
    spec = parse_group_spec(str(payload["group"]))
    if lattice is None:
        lattice = build_lattice(spec)
    elif lattice.spec != spec:
        raise LatticeMismatchError(
            f"payload group {spec} does not match lattice {lattice.spec}"
        )
    arrows = []
    for entry in payload["arrows"]:
        try:
            src, tgt = entry
            arrow = Arrow(Subgroup(tuple(src)), Subgroup(tuple(tgt)))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"bad arrow entry {entry!r}: {exc}") from None
        if arrow not in lattice.pair_index:
            raise ValueError(f"arrow {arrow} is not in the lattice of {spec}")
        arrows.append(arrow)
    return lattice, arrows


def from_json_dict(payload: dict, lattice: Lattice | None = None) -> TransferSystem:
    """Decode and validate a transfer system from its JSON payload."""
    lattice, arrows = arrows_from_json_dict(payload, lattice)
    return TransferSystem.from_arrows(lattice, arrows)


def from_json(text: str, lattice: Lattice | None = None) -> TransferSystem:
    return from_json_dict(json.loads(text), lattice)
