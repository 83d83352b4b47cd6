"""Test functions on explicit open domains, with jet evaluators.

Every :class:`FunctionSpec` knows how to produce its jet at a point. Entries
that also carry ``exact_derivs`` (a closed-form ``(x, i) -> f^(i)(x)``) can be
checked against the jet arithmetic independently.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .jet import (
    K_MAX,
    Jet,
    jet_add,
    jet_compose,
    jet_const,
    jet_cos,
    jet_div,
    jet_exp,
    jet_ln,
    jet_mul,
    jet_scale,
    jet_sin,
    jet_var,
)

INF = math.inf
DEFAULT_MARGIN = 1e-3


@dataclass(frozen=True)
class DomainSet:
    """Finite union of disjoint open intervals, kept sorted."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple(sorted((float(lo), float(hi)) for lo, hi in self.intervals))
        if not ivs:
            raise ValueError("domain needs at least one interval")
        for lo, hi in ivs:
            if not lo < hi:
                raise ValueError(f"empty interval ({lo}, {hi})")
        for (_, hi), (lo, _) in zip(ivs, ivs[1:]):
            if lo < hi:
                raise ValueError("domain intervals overlap")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def real_line(cls) -> "DomainSet":
        return cls(((-INF, INF),))

    @classmethod
    def interval(cls, lo: float, hi: float) -> "DomainSet":
        return cls(((lo, hi),))

    def __contains__(self, x: float) -> bool:
        return any(lo < x < hi for lo, hi in self.intervals)

    def intersect(self, other: "DomainSet") -> "DomainSet":
        out = []
        for a_lo, a_hi in self.intervals:
            for b_lo, b_hi in other.intervals:
                lo, hi = max(a_lo, b_lo), min(a_hi, b_hi)
                if lo < hi:
                    out.append((lo, hi))
        if not out:
            raise DomainError("domains do not intersect")
        return DomainSet(tuple(out))


ExactDerivs = Callable[[float, int], float]


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    domain: DomainSet
    jet_fn: Callable[[float, int], Jet] = field(repr=False)
    exact_derivs: Optional[ExactDerivs] = field(default=None, repr=False)
    zero_set_hint: tuple[float, ...] = ()

    def jet_at(self, x: float, k: int) -> Jet:
        if x not in self.domain:
            raise DomainError(f"{x} is outside the domain of {self.name}")
        if not 0 <= k <= K_MAX:
            raise ValueError(f"jet order must be in 0..{K_MAX}, got {k}")
        return self.jet_fn(x, k)

    def __call__(self, x: float) -> float:
        return self.jet_at(x, 0).value


# ----------------------------------------------------------------------------
# builtin corpus


def _poly_derivs(coeffs: Sequence[float]) -> ExactDerivs:
    """Closed-form derivatives of sum_j coeffs[j] x^j."""

    def derivs(x: float, i: int) -> float:
        total = 0.0
        for j, a in enumerate(coeffs):
            if j >= i:
                total += a * math.perm(j, i) * x ** (j - i)
        return total

    return derivs


def _poly_jet(coeffs: Sequence[float]) -> Callable[[float, int], Jet]:
    def jet_fn(x: float, k: int) -> Jet:
        t = jet_var(x, k)
        acc = jet_const(0.0, k)
        for a in reversed(coeffs):
            acc = jet_add(jet_mul(acc, t), jet_const(a, k))
        return acc

    return jet_fn


def _real_roots(coeffs: Sequence[float]) -> tuple[float, ...]:
    trimmed = list(coeffs)
    while trimmed and trimmed[-1] == 0:
        trimmed.pop()
    if len(trimmed) < 2:
        return ()
    roots = np.roots(trimmed[::-1])
    return tuple(sorted(float(r.real) for r in roots if abs(r.imag) < 1e-12))


def polynomial(name: str, coeffs: Sequence[float],
               domain: Optional[DomainSet] = None) -> FunctionSpec:
    """Polynomial ``sum_j coeffs[j] x^j``; its real zeros become the sampling hint."""
    coeffs = tuple(float(c) for c in coeffs)
    return FunctionSpec(name, domain or DomainSet.real_line(), _poly_jet(coeffs),
                        _poly_derivs(coeffs), _real_roots(coeffs))


def constant(name: str, value: float, domain: Optional[DomainSet] = None) -> FunctionSpec:
    return FunctionSpec(
        name,
        domain or DomainSet.real_line(),
        lambda x, k: jet_const(value, k),
        lambda x, i: value if i == 0 else 0.0,
        (0.0,) if value == 0 else (),
    )


def _exp_ax(a: float) -> FunctionSpec:
    return FunctionSpec(
        f"exp_{a:g}x",
        DomainSet.real_line(),
        lambda x, k: jet_exp(jet_scale(jet_var(x, k), a)),
        lambda x, i: a**i * math.exp(a * x),
    )


def _sin_derivs(x: float, i: int) -> float:
    return math.sin(x + i * math.pi / 2)


def _cos_derivs(x: float, i: int) -> float:
    return math.cos(x + i * math.pi / 2)


def _lorentz_derivs(x: float, i: int) -> float:
    # 1/(1+x^2) = Im(1/(x - i)); n-th derivative is Im((-1)^n n! / (x - i)^(n+1))
    z = complex(x, -1.0)
    return ((-1) ** i * math.factorial(i) / z ** (i + 1)).imag


def _lorentz_jet(x: float, k: int) -> Jet:
    t = jet_var(x, k)
    return jet_div(jet_const(1.0, k), jet_add(jet_const(1.0, k), jet_mul(t, t)))


def _two_plus_sin_derivs(x: float, i: int) -> float:
    return (2.0 if i == 0 else 0.0) + _sin_derivs(x, i)


def _log_shift_derivs(x: float, i: int) -> float:
    # ln(x + 2) on (-2, inf)
    if i == 0:
        return math.log(x + 2.0)
    return (-1) ** (i - 1) * math.factorial(i - 1) / (x + 2.0) ** i


def _log_shift_jet(x: float, k: int) -> Jet:
    return jet_ln(jet_add(jet_var(x, k), jet_const(2.0, k)))


def builtin_corpus() -> list[FunctionSpec]:
    """The catalogue of named test functions used by the verification suites."""
    line = DomainSet.real_line()
    two_sided = DomainSet(((-INF, -0.5), (0.5, INF)))
    return [
        constant("const_one", 1.0),
        constant("const_minus_one", -1.0),
        constant("const_e", math.e),
        constant("const_four", 4.0),
        polynomial("identity", [0, 1]),
        polynomial("square", [0, 0, 1]),
        polynomial("cube", [0, 0, 0, 1]),
        polynomial("x2_minus_1", [-1, 0, 1]),
        polynomial("cubic_mixed", [0.5, -2, 0, 1]),
        polynomial("three_plus_x2", [3, 0, 1]),
        polynomial("minus_two_minus_x2", [-2, 0, -1]),
        polynomial("square_split", [0, 0, 1], domain=two_sided),
        _exp_ax(1.0),
        _exp_ax(-0.5),
        FunctionSpec("sin", line, lambda x, k: jet_sin(jet_var(x, k)), _sin_derivs,
                     tuple(j * math.pi for j in range(-3, 4))),
        FunctionSpec("cos", line, lambda x, k: jet_cos(jet_var(x, k)), _cos_derivs,
                     tuple((j + 0.5) * math.pi for j in range(-4, 4))),
        FunctionSpec("lorentzian", line, _lorentz_jet, _lorentz_derivs),
        FunctionSpec("two_plus_sin", line,
                     lambda x, k: jet_add(jet_const(2.0, k), jet_sin(jet_var(x, k))),
                     _two_plus_sin_derivs),
        FunctionSpec("log_x_plus_2", DomainSet.interval(-2.0, INF), _log_shift_jet,
                     _log_shift_derivs, (-1.0,)),
    ]


_ALIASES = {"exp": "exp_1x"}


def lookup(name: str, corpus: Optional[Sequence[FunctionSpec]] = None) -> FunctionSpec:
    name = _ALIASES.get(name, name)
    for f in corpus if corpus is not None else builtin_corpus():
        if f.name == name:
            return f
    raise KeyError(f"unknown corpus function {name!r}")


# ----------------------------------------------------------------------------
# construction helpers


def prescribe_jet(x0: float, v: Sequence[float]) -> FunctionSpec:
    """The polynomial ``p(s) = sum_i v[i] (s - x0)^i / i!`` whose jet at ``x0`` is ``v``."""
    v = tuple(float(t) for t in v)
    if not 1 <= len(v) <= K_MAX + 1:
        raise ValueError(f"prescribed jet length must be in 1..{K_MAX + 1}")
    n = len(v)

    def derivs(x: float, i: int) -> float:
        s = x - x0
        return sum(v[j] * s ** (j - i) / math.factorial(j - i) for j in range(i, n))

    def jet_fn(x: float, k: int) -> Jet:
        return Jet(tuple(derivs(x, i) for i in range(k + 1)))

    return FunctionSpec(f"prescribed@{x0:g}", DomainSet.real_line(), jet_fn, derivs)


def sample_points(domain: DomainSet, n: int, seed: int, margin: float = DEFAULT_MARGIN,
                  avoid: Sequence[float] = (), window: float = 4.0) -> list[float]:
    """Draw ``n`` reproducible points inside ``domain``.

    Unbounded ends are clipped to ``[-window, window]``. Points keep at least
    ``margin`` away from interval ends and from every entry of ``avoid``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if margin < 0:
        raise ValueError("margin must be >= 0")
    usable = []
    for lo, hi in domain.intervals:
        lo = max(lo, -window) if math.isinf(lo) else lo
        hi = min(hi, window) if math.isinf(hi) else hi
        lo, hi = lo + margin, hi - margin
        if lo < hi:
            usable.append((lo, hi))
        elif lo == hi and margin == 0:
            continue
    if not usable:
        raise DomainError(f"domain too small for margin {margin}")
    lengths = [hi - lo for lo, hi in usable]
    rng = random.Random(seed)
    out: list[float] = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 1000 * n:
            raise DomainError("could not place points away from the avoid set")
        lo, hi = rng.choices(usable, weights=lengths)[0]
        x = rng.uniform(lo, hi)
        if all(abs(x - a) >= margin for a in avoid):
            out.append(x)
    return out


# ----------------------------------------------------------------------------
# combinators


def _combine_exact(f: FunctionSpec, g: FunctionSpec, how: str) -> Optional[ExactDerivs]:
    if f.exact_derivs is None or g.exact_derivs is None:
        return None
    fd, gd = f.exact_derivs, g.exact_derivs
    if how == "sum":
        return lambda x, i: fd(x, i) + gd(x, i)
    return lambda x, i: sum(math.comb(i, j) * fd(x, j) * gd(x, i - j) for j in range(i + 1))


def product(f: FunctionSpec, g: FunctionSpec) -> FunctionSpec:
    return FunctionSpec(
        f"({f.name}*{g.name})",
        f.domain.intersect(g.domain),
        lambda x, k: jet_mul(f.jet_at(x, k), g.jet_at(x, k)),
        _combine_exact(f, g, "product"),
        tuple(sorted(set(f.zero_set_hint) | set(g.zero_set_hint))),
    )


def sum_(f: FunctionSpec, g: FunctionSpec) -> FunctionSpec:
    return FunctionSpec(
        f"({f.name}+{g.name})",
        f.domain.intersect(g.domain),
        lambda x, k: jet_add(f.jet_at(x, k), g.jet_at(x, k)),
        _combine_exact(f, g, "sum"),
    )


def scale(f: FunctionSpec, s: float) -> FunctionSpec:
    fd = f.exact_derivs
    return FunctionSpec(
        f"{s:g}*{f.name}",
        f.domain,
        lambda x, k: jet_scale(f.jet_at(x, k), s),
        None if fd is None else (lambda x, i: s * fd(x, i)),
        f.zero_set_hint if s != 0 else (),
    )


def exp_of(f: FunctionSpec) -> FunctionSpec:
    return FunctionSpec(f"exp({f.name})", f.domain, lambda x, k: jet_exp(f.jet_at(x, k)))


@dataclass(frozen=True)
class ScalarMap:
    """A real function of one real variable with its own open domain.

    ``derivs(y, k)`` returns ``[d(y), d'(y), ..., d^(k)(y)]`` when known; when
    absent only order-0 compositions are available.
    """

    name: str
    fn: Callable[[float], float]
    domain: DomainSet
    derivs: Optional[Callable[[float, int], Sequence[float]]] = None

    def __call__(self, y: float) -> float:
        if y not in self.domain:
            raise DomainError(f"{y} is outside the domain of {self.name}")
        return self.fn(y)


def compose_scalar(d: ScalarMap, f: FunctionSpec) -> FunctionSpec:
    def jet_fn(x: float, k: int) -> Jet:
        inner = f.jet_at(x, k)
        y = inner.value
        if k == 0:
            return Jet((d(y),))
        if d.derivs is None:
            raise ValueError(f"{d.name} has no derivative data; only order 0 is available")
        if y not in d.domain:
            raise DomainError(f"{y} is outside the domain of {d.name}")
        return jet_compose(d.derivs(y, k), inner)

    return FunctionSpec(f"{d.name}({f.name})", f.domain, jet_fn)
