"""Partition-sum evaluation of the derivatives of ``ln o f``.

For positive ``f``::

    (ln f)^(l) = sum over (m_1..m_l) with sum_i i*m_i = l of
                 l! / (m_1! ... m_l!) * (-1)^(M-1) (M-1)! / f^M * prod_j (f^(j) / j!)^(m_j)

where ``M = m_1 + ... + m_l``. This is the outer function ``ln`` plugged into
Faa di Bruno's formula; ``ln^(M)(y) = (-1)^(M-1) (M-1)! / y^M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, OrderMismatch
from .jet import K_MAX, Jet

FACTORIALS = [math.factorial(n) for n in range(K_MAX + 1)]


@dataclass(frozen=True)
class PartitionTerm:
    m: tuple[int, ...]

    def __post_init__(self):
        if any(v < 0 for v in self.m):
            raise ValueError("multiplicities must be nonnegative")
        if self.l < 1 or self.size < 1:
            raise ValueError("empty partition")

    @property
    def l(self) -> int:  # noqa: E743
        return sum((i + 1) * v for i, v in enumerate(self.m))

    @property
    def size(self) -> int:
        """Number of parts ``M``."""
        return sum(self.m)

    @property
    def multinomial(self) -> int:
        out = FACTORIALS[self.l]
        for v in self.m:
            out //= FACTORIALS[v]
        return out

    @property
    def sign_factor(self) -> int:
        M = self.size
        return (-1) ** (M - 1) * FACTORIALS[M - 1]

    @property
    def coefficient(self) -> Fraction:
        """Exact weight of ``prod_j (f^(j))^(m_j) / f^M`` in the sum."""
        denom = 1
        for j, v in enumerate(self.m, start=1):
            denom *= FACTORIALS[j] ** v
        return Fraction(self.multinomial * self.sign_factor, denom)

    def __str__(self) -> str:
        factors = [f"(f^({j}))^{v}" if v > 1 else f"f^({j})"
                   for j, v in enumerate(self.m, start=1) if v]
        return f"{self.coefficient} * {' '.join(factors)} / f^{self.size}"


def _descend(rest: int, largest: int):
    # partitions of `rest` into parts <= largest, largest part first
    if rest == 0:
        yield []
        return
    for part in range(min(rest, largest), 0, -1):
        for tail in _descend(rest - part, part):
            yield [part] + tail


def partitions(l: int) -> list[PartitionTerm]:  # noqa: E741
    """All multiplicity vectors of ``l``, in descending lexicographic order."""
    if not 1 <= l <= K_MAX:
        raise ValueError(f"l must be in 1..{K_MAX}, got {l}")
    out = []
    for parts in _descend(l, l):
        m = [0] * l
        for p in parts:
            m[p - 1] += 1
        out.append(tuple(m))
    return [PartitionTerm(m) for m in sorted(out, reverse=True)]


def faa_ln_derivative(fjet: Jet, l: int) -> float:  # noqa: E741
    """``(ln f)^(l)`` at the jet's base point, via the partition sum."""
    if l > fjet.order:
        raise OrderMismatch(f"jet of order {fjet.order} cannot give derivative {l}")
    f0 = fjet[0]
    if not f0 > 0.0:
        raise DomainError(f"f must be positive, got value {f0}")
    terms = []
    for term in partitions(l):
        prod = 1.0
        for j, v in enumerate(term.m, start=1):
            if v:
                prod *= (fjet[j] / FACTORIALS[j]) ** v
        terms.append(term.multinomial * term.sign_factor / f0**term.size * prod)
    return math.fsum(terms)


def expansion_table(l: int) -> str:  # noqa: E741
    """Human-readable term table for ``(ln f)^(l)``."""
    rows = [f"(ln f)^({l}) has {len(partitions(l))} terms",
            f"{'m':<28}{'l!/prod m!':>12}{'(-1)^(M-1)(M-1)!':>18}  term"]
    for term in partitions(l):
        rows.append(f"{str(term.m):<28}{term.multinomial:>12}{term.sign_factor:>18}  {term}")
    return "\n".join(rows)
