"""Operator families and the residuals of the identities they satisfy.

Every operator here is pointwise: ``D(f)(x)`` depends only on ``x`` and the
jet of ``f`` at ``x``. That is what lets the identities be checked one point
at a time with jet arithmetic.

Identities (all residuals are signed, with the individual terms kept so a
scale-aware tolerance can be applied):

* Leibniz rule:          T(fg) - f T(g) - g T(f)
* second-order Leibniz:  T(fg) - T(f) g - f T(g) - 2 A(f) A(g)
* trilinear identity:    D(fgh) - f D(gh) - g D(fh) - h D(fg)
                         + fg D(h) + fh D(g) + gh D(f)
* diagonal identity:     D(f^3) - 3 f D(f^2) + 3 f^2 D(f)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .corpus import FunctionSpec, ScalarMap
from .errors import DomainError, PreconditionError
from .jet import Jet, jet_add, jet_ln, jet_mul, jet_powi

DEFAULT_TOL = 1e-9


# ----------------------------------------------------------------------------
# coefficient functions


@dataclass(frozen=True)
class CoeffFn:
    """A continuous scalar coefficient ``x -> c(x)``."""

    fn: Callable[[float], float] = field(repr=False)
    label: str = "c(x)"
    const_value: Optional[float] = None

    @classmethod
    def constant(cls, value: float) -> "CoeffFn":
        value = float(value)
        return cls(lambda x: value, f"{value:g}", value)

    @classmethod
    def from_callable(cls, fn: Callable[[float], float], label: str = "c(x)") -> "CoeffFn":
        return cls(fn, label, None)

    @property
    def is_constant(self) -> bool:
        return self.const_value is not None

    @property
    def is_zero(self) -> bool:
        return self.const_value == 0.0

    def __call__(self, x: float) -> float:
        return self.fn(x)


def as_coeff(c) -> CoeffFn:
    if isinstance(c, CoeffFn):
        return c
    if callable(c):
        return CoeffFn.from_callable(c)
    return CoeffFn.constant(c)


ZERO = CoeffFn.constant(0.0)


def xlogx(v: float) -> float:
    """``v ln|v|`` with the convention ``0 ln 0 = 0``."""
    return 0.0 if v == 0.0 else v * math.log(abs(v))


def xlog2x(v: float) -> float:
    """``v ln(|v|)^2`` with the convention ``0 ln(0)^2 = 0``."""
    return 0.0 if v == 0.0 else v * math.log(abs(v)) ** 2


# ----------------------------------------------------------------------------
# operator families


class Operator:
    """Base for pointwise operators ``D(f)(x) = F(x, jet of f at x)``."""

    order: int = 0
    name: str = "D"

    def evaluate(self, x: float, jet: Jet) -> float:
        raise NotImplementedError

    def __call__(self, f: FunctionSpec, x: float) -> float:
        return apply(self, f, x)


def _check_degeneration(k: int, c1: CoeffFn, c2: CoeffFn) -> None:
    if k not in (0, 1, 2):
        raise ValueError(f"order k must be 0, 1 or 2, got {k}")
    if k == 0 and not (c1.is_zero and c2.is_zero):
        raise ValueError("k=0 forces c1 = c2 = 0")
    if k == 1 and not c2.is_zero:
        raise ValueError("k=1 forces c2 = 0")


@dataclass(frozen=True)
class Characterized(Operator):
    """``c0 f ln|f| + c1 f' + c2 f'' + d00 f ln^2|f|``, the full solution family."""

    c0: CoeffFn = ZERO
    c1: CoeffFn = ZERO
    c2: CoeffFn = ZERO
    d00: CoeffFn = ZERO
    k: int = 2
    name: str = "characterized"

    def __post_init__(self):
        for attr in ("c0", "c1", "c2", "d00"):
            object.__setattr__(self, attr, as_coeff(getattr(self, attr)))
        _check_degeneration(self.k, self.c1, self.c2)

    @property
    def order(self) -> int:
        return self.k

    @property
    def coefficients(self) -> tuple[CoeffFn, CoeffFn, CoeffFn, CoeffFn]:
        return self.c0, self.c1, self.c2, self.d00

    def evaluate(self, x: float, jet: Jet) -> float:
        v = jet[0]
        total = self.c0(x) * xlogx(v) + self.d00(x) * xlog2x(v)
        if self.k >= 1:
            total += self.c1(x) * jet[1]
        if self.k >= 2:
            total += self.c2(x) * jet[2]
        return total


@dataclass(frozen=True)
class LogPolynomial(Operator):
    """``f [sum_i c_i (ln f)^(i) + sum_ij d_ij (ln f)^(i) (ln f)^(j)]`` on positive ``f``."""

    c: tuple[CoeffFn, ...]
    d: tuple[tuple[CoeffFn, ...], ...]
    name: str = "log_polynomial"

    def __post_init__(self):
        c = tuple(as_coeff(t) for t in self.c)
        d = tuple(tuple(as_coeff(t) for t in row) for row in self.d)
        n = len(c)
        if n == 0 or len(d) != n or any(len(row) != n for row in d):
            raise ValueError("need len(c) = k+1 and a (k+1)x(k+1) matrix d")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def evaluate(self, x: float, jet: Jet) -> float:
        if not jet[0] > 0.0:
            raise DomainError(f"log-polynomial operator needs f(x) > 0, got {jet[0]}")
        lg = jet_ln(jet).d
        n = len(self.c)
        lin = math.fsum(self.c[i](x) * lg[i] for i in range(n))
        quad = math.fsum(self.d[i][j](x) * lg[i] * lg[j] for i in range(n) for j in range(n))
        return jet[0] * (lin + quad)


@dataclass(frozen=True)
class LinearDifferential(Operator):
    """``c1 f' + c2 f''``: the linear solutions."""

    c1: CoeffFn = ZERO
    c2: CoeffFn = ZERO
    k: int = 2
    name: str = "linear_differential"

    def __post_init__(self):
        object.__setattr__(self, "c1", as_coeff(self.c1))
        object.__setattr__(self, "c2", as_coeff(self.c2))
        _check_degeneration(self.k, self.c1, self.c2)

    @property
    def order(self) -> int:
        return self.k

    def evaluate(self, x: float, jet: Jet) -> float:
        total = 0.0
        if self.k >= 1:
            total += self.c1(x) * jet[1]
        if self.k >= 2:
            total += self.c2(x) * jet[2]
        return total


@dataclass(frozen=True)
class SecondDerivativeOnly(Operator):
    """``c2 f''``: the solutions annihilating affine functions."""

    c2: CoeffFn = CoeffFn.constant(1.0)
    name: str = "second_derivative"

    def __post_init__(self):
        object.__setattr__(self, "c2", as_coeff(self.c2))

    order = 2

    def evaluate(self, x: float, jet: Jet) -> float:
        return self.c2(x) * jet[2]


@dataclass(frozen=True)
class Composition(Operator):
    """``D(f)(x) = d(f(x))`` for a scalar map ``d``."""

    d: ScalarMap
    name: str = "composition"

    order = 0

    def evaluate(self, x: float, jet: Jet) -> float:
        return self.d(jet[0])


@dataclass(frozen=True)
class BlackBoxPointwise(Operator):
    """An arbitrary ``(x, jet) -> real`` map consuming derivatives up to ``order``."""

    F: Callable[[float, Jet], float] = field(repr=False)
    order: int = 0
    name: str = "black_box"

    def evaluate(self, x: float, jet: Jet) -> float:
        return self.F(x, jet)


@dataclass(frozen=True)
class KMPair:
    """Operands ``(T, A)`` of the second-order Leibniz rule."""

    T: Operator
    A: Operator
    name: str = "pair"

    @property
    def order(self) -> int:
        return max(self.T.order, self.A.order)


# named constructors for the operators the identities single out


def derivative(c: float = 1.0) -> LinearDifferential:
    return LinearDifferential(c1=c, c2=0.0, name="first_derivative")


def second_derivative(c: float = 1.0) -> SecondDerivativeOnly:
    return SecondDerivativeOnly(c2=c)


def leibniz_family(c=1.0, d=1.0) -> Characterized:
    """``c f ln|f| + d f'``, the general Leibniz-rule solution."""
    return Characterized(c0=c, c1=d, name="leibniz_family")


def log_pair() -> KMPair:
    """``(f ln^2|f|, f ln|f|)``."""
    return KMPair(Characterized(d00=1.0, name="f_ln2"), Characterized(c0=1.0, name="f_ln"),
                  name="log_pair")


def km_pair_printed(b=1.0, c=1.0) -> KMPair:
    """``(c^2/2 f'' + b f', c f')`` with the normalization exactly as printed."""
    b, c = as_coeff(b), as_coeff(c)
    half_sq = CoeffFn.from_callable(lambda x: 0.5 * c(x) ** 2, f"({c.label})^2/2")
    if c.is_constant:
        half_sq = CoeffFn.constant(0.5 * c.const_value**2)
    return KMPair(LinearDifferential(c1=b, c2=half_sq, name="km_T_printed"),
                  LinearDifferential(c1=c, name="km_A"), name="km_pair_printed")


def km_pair(b=1.0, c=1.0) -> KMPair:
    """``(c^2 f'' + b f', c f')``.

    This is the normalization under which the pair satisfies the second-order
    Leibniz rule with the factor 2 in front of ``A(f) A(g)``; ``b=0, c=1`` gives
    ``(f'', f')``.
    """
    b, c = as_coeff(b), as_coeff(c)
    sq = CoeffFn.from_callable(lambda x: c(x) ** 2, f"({c.label})^2")
    if c.is_constant:
        sq = CoeffFn.constant(c.const_value**2)
    return KMPair(LinearDifferential(c1=b, c2=sq, name="km_T"),
                  LinearDifferential(c1=c, name="km_A"), name="km_pair")


# ----------------------------------------------------------------------------
# evaluation


def apply(op: Operator, f: FunctionSpec, x: float) -> float:
    return op.evaluate(x, f.jet_at(x, op.order))


@dataclass(frozen=True)
class Residual:
    """Signed residual of an identity plus the terms that were summed."""

    value: float
    terms: tuple[float, ...] = ()

    @property
    def scale(self) -> float:
        return max((abs(t) for t in self.terms), default=0.0)

    @property
    def scaled(self) -> float:
        return abs(self.value) / max(1.0, self.scale)

    def ok(self, tol: float = DEFAULT_TOL) -> bool:
        return abs(self.value) <= tol * max(1.0, self.scale)


def _residual(terms: Sequence[float]) -> Residual:
    terms = tuple(float(t) for t in terms)
    return Residual(math.fsum(terms), terms)


def _jets(k: int, x: float, *fs: FunctionSpec) -> list[Jet]:
    return [f.jet_at(x, k) for f in fs]


def id2_terms(D: Operator, x: float, a: Jet, b: Jet, c: Jet) -> list[float]:
    """The seven signed terms of the trilinear identity, on jets."""
    f, g, h = a[0], b[0], c[0]
    ev = D.evaluate
    return [
        ev(x, jet_mul(jet_mul(a, b), c)),
        -f * ev(x, jet_mul(b, c)),
        -g * ev(x, jet_mul(a, c)),
        -h * ev(x, jet_mul(a, b)),
        f * g * ev(x, c),
        f * h * ev(x, b),
        g * h * ev(x, a),
    ]


def residual_id2(D: Operator, f: FunctionSpec, g: FunctionSpec, h: FunctionSpec,
                 x: float) -> Residual:
    return _residual(id2_terms(D, x, *_jets(D.order, x, f, g, h)))


trilinear_A3 = residual_id2


def powers_terms(D: Operator, x: float, a: Jet) -> list[float]:
    f = a[0]
    return [
        D.evaluate(x, jet_powi(a, 3)),
        -3.0 * f * D.evaluate(x, jet_powi(a, 2)),
        3.0 * f * f * D.evaluate(x, a),
    ]


def residual_powers(D: Operator, f: FunctionSpec, x: float) -> Residual:
    return _residual(powers_terms(D, x, f.jet_at(x, D.order)))


def residual_leibniz(T: Operator, f: FunctionSpec, g: FunctionSpec, x: float) -> Residual:
    a, b = _jets(T.order, x, f, g)
    return _residual([T.evaluate(x, jet_mul(a, b)), -a[0] * T.evaluate(x, b),
                      -b[0] * T.evaluate(x, a)])


def _second_leibniz_terms(pair: KMPair, x: float, a: Jet, b: Jet) -> list[float]:
    T, A = pair.T, pair.A
    kt, ka = T.order, A.order
    return [
        T.evaluate(x, jet_mul(a, b).truncate(kt)),
        -T.evaluate(x, a.truncate(kt)) * b[0],
        -a[0] * T.evaluate(x, b.truncate(kt)),
        -2.0 * A.evaluate(x, a.truncate(ka)) * A.evaluate(x, b.truncate(ka)),
    ]


def residual_second_leibniz(pair: KMPair, f: FunctionSpec, g: FunctionSpec,
                            x: float) -> Residual:
    return _residual(_second_leibniz_terms(pair, x, *_jets(pair.order, x, f, g)))


def residual_eq_rem2(pair: KMPair, f: FunctionSpec, g: FunctionSpec, h: FunctionSpec,
                     x: float, check: bool = True, tol: float = DEFAULT_TOL) -> Residual:
    """Seven-term expression for ``T`` minus ``2 A(h) [A(fg) - f A(g) - g A(f)]``.

    The returned terms are ``(lhs, -rhs)`` so each side can be inspected. With
    ``check`` the second-order Leibniz rule is first confirmed at ``(f, g)`` and
    ``(fg, h)``, the two instances the expansion relies on.
    """
    k = pair.order
    a, b, c = _jets(k, x, f, g, h)
    if check:
        for p, q in ((a, b), (jet_mul(a, b), c)):
            r = _residual(_second_leibniz_terms(pair, x, p, q))
            if not r.ok(tol):
                raise PreconditionError(
                    f"pair {pair.name} violates the second-order Leibniz rule at x={x} "
                    f"(residual {r.value:.3e})")
    lhs_terms = id2_terms(pair.T, x, a.truncate(pair.T.order), b.truncate(pair.T.order),
                          c.truncate(pair.T.order))
    lhs = math.fsum(lhs_terms)
    ka = pair.A.order
    A = lambda j: pair.A.evaluate(x, j.truncate(ka))  # noqa: E731
    rhs = 2.0 * A(c) * (A(jet_mul(a, b)) - a[0] * A(b) - b[0] * A(a))
    scale_terms = tuple(lhs_terms) + (rhs,)
    return Residual(lhs - rhs, (lhs, -rhs) + scale_terms)


def difference_apply(T: Operator, hs: Sequence[FunctionSpec], f: FunctionSpec,
                     x: float) -> float:
    """``sum over S of (-1)^(n-|S|) T(f + sum_S h)(x)``, the n-fold difference."""
    k = T.order
    base = f.jet_at(x, k)
    hjets = [h.jet_at(x, k) for h in hs]
    n = len(hs)
    terms = []
    for size in range(n + 1):
        sign = -1.0 if (n - size) % 2 else 1.0
        for subset in itertools.combinations(range(n), size):
            j = base
            for i in subset:
                j = jet_add(j, hjets[i])
            terms.append(sign * T.evaluate(x, j))
    return math.fsum(terms)


def shift_commutator(D: Operator, shift: float, f: FunctionSpec, x: float) -> Residual:
    """``D(tau_shift f)(x) - D(f)(x + shift)`` with ``(tau_s f)(x) = f(x + s)``."""
    j = f.jet_at(x + shift, D.order)
    return _residual([D.evaluate(x, j), -D.evaluate(x + shift, j)])


def km_nondeg_det(a: float, b: float) -> float:
    """Determinant of ``[[a, b], [a ln|a|, b ln|b|]]``."""
    if a == 0.0 or b == 0.0:
        raise DomainError("arguments must be nonzero")
    return a * b * (math.log(abs(b)) - math.log(abs(a)))


def localization_check(D: Operator, f1: FunctionSpec, f2: FunctionSpec,
                       J: tuple[float, float], points: Sequence[float],
                       agree_tol: float = 1e-12) -> float:
    """Largest ``|D(f1)(x) - D(f2)(x)|`` over the points lying in ``J``.

    Raises :class:`PreconditionError` when ``f1`` and ``f2`` visibly differ at
    one of those points (their jets up to ``D.order`` are compared).
    """
    lo, hi = J
    inside = [x for x in points if lo < x < hi]
    if not inside:
        raise PreconditionError(f"no sample point lies in {J}")
    worst = 0.0
    for x in inside:
        j1, j2 = f1.jet_at(x, D.order), f2.jet_at(x, D.order)
        for p, q in zip(j1, j2):
            if abs(p - q) > agree_tol * max(1.0, abs(p), abs(q)):
                raise PreconditionError(f"{f1.name} and {f2.name} differ at x={x}")
        worst = max(worst, abs(D.evaluate(x, j1) - D.evaluate(x, j2)))
    return worst
