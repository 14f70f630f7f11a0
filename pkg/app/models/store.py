"""Finite-domain store data: interval-set domains and linear constraints."""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from app.models.term import Var

Bound = Optional[int]  # None is an infinite bound


@dataclass(frozen=True, slots=True)
class Domain:
    """A set of integers as sorted, disjoint, non-adjacent closed intervals"""

    intervals: Tuple[Tuple[Bound, Bound], ...] = ((None, None),)

    @classmethod
    def range(cls, lo: Bound, hi: Bound) -> "Domain":
        if lo is not None and hi is not None and lo > hi:
            return EMPTY
        return cls(((lo, hi),))

    @classmethod
    def of(cls, values) -> "Domain":
        result: List[Tuple[int, int]] = []
        for v in sorted(set(values)):
            if result and result[-1][1] == v - 1:
                result[-1] = (result[-1][0], v)
            else:
                result.append((v, v))
        return cls(tuple(result))

    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def min(self) -> Bound:
        return self.intervals[0][0]

    @property
    def max(self) -> Bound:
        return self.intervals[-1][1]

    def is_finite(self) -> bool:
        return not self.intervals or (self.min is not None and self.max is not None)

    def size(self) -> Optional[int]:
        if not self.is_finite():
            return None
        return sum(hi - lo + 1 for lo, hi in self.intervals)

    def is_fixed(self) -> bool:
        return len(self.intervals) == 1 and self.min is not None and self.min == self.max

    def __contains__(self, value: int) -> bool:
        return any(
            (lo is None or lo <= value) and (hi is None or value <= hi)
            for lo, hi in self.intervals
        )

    def __iter__(self) -> Iterator[int]:
        if not self.is_finite():
            raise ValueError("cannot iterate an infinite domain")
        for lo, hi in self.intervals:
            yield from range(lo, hi + 1)

    def intersect_range(self, lo: Bound, hi: Bound) -> "Domain":
        result = []
        for a, b in self.intervals:
            new_lo = a if lo is None else (lo if a is None else max(a, lo))
            new_hi = b if hi is None else (hi if b is None else min(b, hi))
            if new_lo is None or new_hi is None or new_lo <= new_hi:
                result.append((new_lo, new_hi))
        return Domain(tuple(result))

    def intersect(self, other: "Domain") -> "Domain":
        result: List[Tuple[Bound, Bound]] = []
        for lo, hi in other.intervals:
            result.extend(self.intersect_range(lo, hi).intervals)
        return Domain(tuple(result))

    def remove(self, value: int) -> "Domain":
        if value not in self:
            return self
        result = []
        for lo, hi in self.intervals:
            if (lo is None or lo <= value) and (hi is None or value <= hi):
                if lo is None or lo <= value - 1:
                    result.append((lo, value - 1))
                if hi is None or value + 1 <= hi:
                    result.append((value + 1, hi))
            else:
                result.append((lo, hi))
        return Domain(tuple(result))

    def __str__(self) -> str:
        if not self.intervals:
            return "{}"
        parts = []
        for lo, hi in self.intervals:
            low = "inf" if lo is None else str(lo)
            high = "sup" if hi is None else str(hi)
            parts.append(low if lo == hi else f"{low}..{high}")
        return "{" + ", ".join(parts) + "}"


EMPTY = Domain(())
FULL = Domain()

LINEAR_OPS = ("<=", "=", "!=")


@dataclass(frozen=True, slots=True)
class LinearConstraint:
    """sum(coeff * var) + constant  op  0, op one of <=, =, !="""

    coeffs: Tuple[Tuple[Var, int], ...]
    op: str
    constant: int

    def variables(self) -> List[Var]:
        return [v for v, _ in self.coeffs]

    def __str__(self) -> str:
        parts = [f"{c}*{v}" if c != 1 else str(v) for v, c in self.coeffs]
        text = " + ".join(parts) if parts else "0"
        if self.constant:
            text += f" + {self.constant}"
        return f"{text} {self.op} 0"


@dataclass
class Store:
    """The constraint store of one derivation state; copy before changing"""

    domains: Dict[Var, Domain] = field(default_factory=dict)
    constraints: List[LinearConstraint] = field(default_factory=list)

    def copy(self) -> "Store":
        return Store(dict(self.domains), list(self.constraints))

    def __contains__(self, var: Var) -> bool:
        return var in self.domains

    def domain(self, var: Var) -> Domain:
        return self.domains.get(var, FULL)

    def variables(self) -> List[Var]:
        return sorted(self.domains, key=lambda v: v.id)

    def summary(self) -> str:
        return f"vars={len(self.domains)} constraints={len(self.constraints)}"
