"""Truncated Taylor jets carrying raw derivative values.

A :class:`Jet` of order ``k`` stores ``(f(x), f'(x), ..., f^(k)(x))``. The
entries are derivative values, not Taylor coefficients, so products use the
binomial (general Leibniz) convolution

    (fg)^(n) = sum_i C(n, i) f^(i) g^(n-i)

and every entry can be read off directly as the corresponding derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, JetOverflow, OrderMismatch

K_MAX = 8

_BINOM = [[math.comb(n, i) for i in range(n + 1)] for n in range(K_MAX + 2)]


def _checked(d: Sequence[float]) -> "Jet":
    for v in d:
        if not math.isfinite(v):
            raise JetOverflow(f"non-finite jet entry in {list(d)!r}")
    return Jet(tuple(d))


@dataclass(frozen=True)
class Jet:
    """Values ``d[i] = f^(i)(x)`` for ``i = 0..order``."""

    d: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= len(self.d) <= K_MAX + 1:
            raise ValueError(f"jet length must be in 1..{K_MAX + 1}, got {len(self.d)}")
        object.__setattr__(self, "d", tuple(float(v) for v in self.d))

    @property
    def order(self) -> int:
        return len(self.d) - 1

    @property
    def value(self) -> float:
        return self.d[0]

    def __getitem__(self, i: int) -> float:
        return self.d[i]

    def __len__(self) -> int:
        return len(self.d)

    def __iter__(self):
        return iter(self.d)

    def truncate(self, k: int) -> "Jet":
        if k > self.order:
            raise OrderMismatch(f"cannot raise jet order {self.order} to {k}")
        return Jet(self.d[: k + 1])

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        if isinstance(other, (int, float)):
            return jet_const(other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else jet_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else jet_add(self, jet_neg(other))

    def __rsub__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else jet_add(other, jet_neg(self))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return jet_scale(self, other)
        if not isinstance(other, Jet):
            return NotImplemented
        return jet_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else jet_div(self, other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else jet_div(other, self)

    def __neg__(self):
        return jet_neg(self)

    def __pow__(self, n: int):
        return jet_powi(self, n)


def _check_order(k: int) -> None:
    if not 0 <= k <= K_MAX:
        raise ValueError(f"jet order must be in 0..{K_MAX}, got {k}")


def _same_order(a: Jet, b: Jet) -> None:
    if a.order != b.order:
        raise OrderMismatch(f"jet orders differ: {a.order} vs {b.order}")


def jet_const(v: float, k: int) -> Jet:
    """Jet of the constant function ``v``."""
    _check_order(k)
    return _checked([v] + [0.0] * k)


def jet_var(x0: float, k: int) -> Jet:
    """Jet of the identity function at ``x0``."""
    _check_order(k)
    d = [x0, 1.0] + [0.0] * (k - 1)
    return _checked(d[: k + 1])


def jet_add(a: Jet, b: Jet) -> Jet:
    _same_order(a, b)
    return _checked([p + q for p, q in zip(a.d, b.d)])


def jet_scale(a: Jet, s: float) -> Jet:
    return _checked([s * p for p in a.d])


def jet_neg(a: Jet) -> Jet:
    return Jet(tuple(-p for p in a.d))


def jet_mul(a: Jet, b: Jet) -> Jet:
    _same_order(a, b)
    out = []
    for n in range(a.order + 1):
        row = _BINOM[n]
        out.append(math.fsum(row[i] * a.d[i] * b.d[n - i] for i in range(n + 1)))
    return _checked(out)


def jet_div(a: Jet, b: Jet) -> Jet:
    """Quotient jet ``a / b``; requires ``b(x) != 0``."""
    _same_order(a, b)
    if b.d[0] == 0.0:
        raise DomainError("division by a jet with zero value entry")
    q: list[float] = []
    for n in range(a.order + 1):
        row = _BINOM[n]
        acc = a.d[n] - math.fsum(row[i] * q[i] * b.d[n - i] for i in range(n))
        q.append(acc / b.d[0])
    return _checked(q)


def jet_powi(a: Jet, n: int) -> Jet:
    if n < 0 or int(n) != n:
        raise ValueError(f"exponent must be a nonnegative integer, got {n!r}")
    out = jet_const(1.0, a.order)
    for _ in range(int(n)):
        out = jet_mul(out, a)
    return out


def jet_exp(a: Jet) -> Jet:
    """Jet of ``exp o f`` from the recurrence ``(e^f)' = f' e^f``."""
    try:
        e0 = math.exp(a.d[0])
    except OverflowError as exc:
        raise JetOverflow(f"exp({a.d[0]}) overflows") from exc
    e = [e0]
    for n in range(1, a.order + 1):
        row = _BINOM[n - 1]
        e.append(math.fsum(row[i] * a.d[i + 1] * e[n - 1 - i] for i in range(n)))
    return _checked(e)


def _log_tail(a: Jet, l0: float) -> Jet:
    # f' = f * (ln f)'  solved order by order for the entries of ln f
    lg = [l0]
    f0 = a.d[0]
    for n in range(1, a.order + 1):
        row = _BINOM[n - 1]
        acc = a.d[n] - math.fsum(row[i] * lg[i + 1] * a.d[n - 1 - i] for i in range(n - 1))
        lg.append(acc / f0)
    return _checked(lg)


def jet_ln(a: Jet) -> Jet:
    if not a.d[0] > 0.0:
        raise DomainError(f"ln of a jet with value entry {a.d[0]} <= 0")
    return _log_tail(a, math.log(a.d[0]))


def jet_ln_abs(a: Jet) -> Jet:
    if a.d[0] == 0.0:
        raise DomainError("ln|.| of a jet with zero value entry")
    return _log_tail(a, math.log(abs(a.d[0])))


def jet_compose(outer: Sequence[float], a: Jet) -> Jet:
    """Chain rule: jet of ``g o f`` given ``outer[m] = g^(m)(f(x))``.

    Uses ``g(f) = sum_m g^(m)(f0) / m! * (f - f0)^m``; powers above the jet
    order contribute nothing to the retained derivatives.
    """
    k = a.order
    if len(outer) < k + 1:
        raise OrderMismatch(f"need {k + 1} outer derivatives, got {len(outer)}")
    delta = Jet((0.0,) + a.d[1:])
    acc = jet_const(outer[0], k)
    power = jet_const(1.0, k)
    for m in range(1, k + 1):
        power = jet_mul(power, delta)
        acc = jet_add(acc, jet_scale(power, outer[m] / math.factorial(m)))
    return acc


def jet_sin(a: Jet) -> Jet:
    s, c = math.sin(a.d[0]), math.cos(a.d[0])
    cycle = (s, c, -s, -c)
    return jet_compose([cycle[m % 4] for m in range(a.order + 1)], a)


def jet_cos(a: Jet) -> Jet:
    s, c = math.sin(a.d[0]), math.cos(a.d[0])
    cycle = (c, -s, -c, s)
    return jet_compose([cycle[m % 4] for m in range(a.order + 1)], a)
