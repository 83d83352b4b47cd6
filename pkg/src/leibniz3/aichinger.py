"""Exponential conjugation, the cube equation, and coefficient recovery.

Conjugating ``D`` by ``exp`` gives ``P(f) = D(e^f) / e^f``. For a pointwise
``D`` this is again pointwise, ``P(f)(x) = G(x, jet of f at x)``, and the
trilinear identity for ``D`` becomes the additive cube equation

    G(v1+v2+v3) - G(v2+v3) - G(v1+v3) - G(v1+v2) + G(v1) + G(v2) + G(v3) = 0

for ``G(x, .)``. Its continuous solutions are polynomials of degree <= 2
vanishing at 0. For the characterized family one finds

    G(x, v) = c0 v0 + d00 v0^2 + c1 v1 + c2 (v2 + v1^2)

(the ``v1^2`` comes from ``(e^g)'' = (g'' + g'^2) e^g``), which is what the
recovery inverts.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .corpus import FunctionSpec
from .errors import DomainError, NotInFamily, RankDeficient
from .jet import Jet, jet_exp
from .operators import Operator, Residual

EXP_GUARD = 300.0


def conjugate_jet(D: Operator, x: float, v: Sequence[float]) -> float:
    """``D(e^g)(x) / e^g(x)`` for any ``g`` whose jet at ``x`` is ``v``."""
    if abs(v[0]) > EXP_GUARD:
        raise DomainError(f"|f(x)| = {abs(v[0])} exceeds the exp guard {EXP_GUARD}")
    j = Jet(tuple(v))
    return D.evaluate(x, jet_exp(j)) / math.exp(v[0])


def conjugate_P(D: Operator, f: FunctionSpec, x: float) -> float:
    return conjugate_jet(D, x, f.jet_at(x, D.order).d)


@dataclass(frozen=True)
class SymbolG:
    n: int
    eval: Callable[[float, Sequence[float]], float] = field(repr=False)

    def __call__(self, x: float, v: Sequence[float]) -> float:
        if len(v) != self.n:
            raise ValueError(f"expected a vector of length {self.n}, got {len(v)}")
        return self.eval(x, v)


def induced_symbol(D: Operator) -> SymbolG:
    """The symbol ``G`` of ``P = exp-conjugate of D``; dimension ``D.order + 1``."""
    return SymbolG(D.order + 1, lambda x, v: conjugate_jet(D, x, v))


def cube_residual(G: SymbolG | Callable, x: float, v1: Sequence[float],
                  v2: Sequence[float], v3: Sequence[float]) -> Residual:
    a, b, c = (np.asarray(v, dtype=float) for v in (v1, v2, v3))
    if not a.shape == b.shape == c.shape:
        raise ValueError("cube residual needs vectors of equal dimension")

    def g(v):
        return G(x, tuple(float(t) for t in v))

    terms = (g(a + b + c), -g(b + c), -g(a + c), -g(a + b), g(a), g(b), g(c))
    return Residual(math.fsum(terms), terms)


# ----------------------------------------------------------------------------
# quadratic least squares


def _quad_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1)]


def _design(V: np.ndarray) -> np.ndarray:
    n = V.shape[1]
    cols = [np.ones(len(V))] + [V[:, i] for i in range(n)]
    cols += [V[:, i] * V[:, j] for i, j in _quad_pairs(n)]
    return np.column_stack(cols)


@dataclass(frozen=True)
class QuadraticModel:
    """``constant + sum_i linear[i] v_i + sum_{i>=j} quadratic[i][j] v_i v_j``."""

    constant: float
    linear: tuple[float, ...]
    quadratic: tuple[tuple[float, ...], ...]
    residual: float
    condition: float

    @property
    def n(self) -> int:
        return len(self.linear)

    def __call__(self, v: Sequence[float]) -> float:
        total = self.constant + sum(c * t for c, t in zip(self.linear, v))
        for i, j in _quad_pairs(self.n):
            total += self.quadratic[i][j] * v[i] * v[j]
        return total


def fit_quadratic(samples: Sequence[tuple[Sequence[float], float]], n: int,
                  rcond: float = 1e-10) -> QuadraticModel:
    """Least-squares fit over the monomials ``1, v_i, v_i v_j (i >= j)``.

    ``residual`` is the largest absolute misfit over the samples.
    """
    V = np.array([np.asarray(v, dtype=float) for v, _ in samples]).reshape(len(samples), n)
    y = np.array([val for _, val in samples], dtype=float)
    X = _design(V)
    if len(samples) < X.shape[1]:
        raise RankDeficient(f"{len(samples)} samples cannot determine {X.shape[1]} coefficients")
    coef, _, rank, sv = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1] or sv[-1] <= rcond * sv[0]:
        raise RankDeficient(f"design matrix rank {rank} < {X.shape[1]}")
    misfit = float(np.max(np.abs(X @ coef - y))) if len(y) else 0.0
    quad = [[0.0] * n for _ in range(n)]
    for (i, j), c in zip(_quad_pairs(n), coef[1 + n:]):
        quad[i][j] = float(c)
    return QuadraticModel(
        constant=float(coef[0]),
        linear=tuple(float(c) for c in coef[1:1 + n]),
        quadratic=tuple(tuple(r) for r in quad),
        residual=misfit,
        condition=float(sv[0] / sv[-1]),
    )


def box_samples(n: int, count: int, seed: int) -> list[tuple[float, ...]]:
    rng = random.Random(seed)
    return [tuple(rng.uniform(-1.0, 1.0) for _ in range(n)) for _ in range(count)]


def fit_symbol(G: SymbolG, x: float, count: int = 50, seed: int = 0) -> QuadraticModel:
    pts = box_samples(G.n, count, seed)
    return fit_quadratic([(v, G(x, v)) for v in pts], G.n)


# ----------------------------------------------------------------------------
# coefficient recovery


@dataclass(frozen=True)
class Recovery:
    x: float
    c0: float
    c1: float
    c2: float
    d00: float
    verify_residual: float

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        return self.c0, self.c1, self.c2, self.d00


def family_symbol(c0: float, c1: float, c2: float, d00: float, v: Sequence[float]) -> float:
    """``G`` of the characterized family at one point, in closed form."""
    total = c0 * v[0] + d00 * v[0] ** 2
    if len(v) > 1:
        total += c1 * v[1]
    if len(v) > 2:
        total += c2 * (v[2] + v[1] ** 2)
    return total


def recover_coefficients(D: Operator, x: float, n_verify: int = 8, seed: int = 0,
                         tol: float = 1e-8) -> Recovery:
    """Recover ``(c0, c1, c2, d00)`` of ``D`` at ``x`` from canonical probes.

    Probes are jets ``e0, 2 e0, e1, e2`` fed through the exp-conjugation::

        G(e0) = c0 + d00,  G(2 e0) = 2 c0 + 4 d00,  G(e1) = c1 + c2,  G(e2) = c2

    The answer is then checked against ``G`` at ``n_verify`` random probes in
    the unit box (and at the origin). Any misfit above ``tol`` (relative to
    ``max(1, |G|)``) raises :class:`NotInFamily`.
    """
    n = max(D.order, 0) + 1
    G = induced_symbol(D)

    def unit(i: int, s: float = 1.0) -> tuple[float, ...]:
        return tuple(s if t == i else 0.0 for t in range(n))

    try:
        g_e0, g_2e0 = G(x, unit(0)), G(x, unit(0, 2.0))
        g_e1 = G(x, unit(1)) if n > 1 else 0.0
        g_e2 = G(x, unit(2)) if n > 2 else 0.0
        d00 = (g_2e0 - 2.0 * g_e0) / 2.0
        c0 = g_e0 - d00
        c2 = g_e2
        c1 = g_e1 - c2
        probes = [tuple(0.0 for _ in range(n))] + box_samples(n, n_verify, seed)
        worst = 0.0
        for v in probes:
            got = G(x, v)
            want = family_symbol(c0, c1, c2, d00, v)
            worst = max(worst, abs(got - want) / max(1.0, abs(got)))
    except DomainError as exc:
        raise NotInFamily(
            f"operator {D.name} is undefined at a canonical probe at x={x}: {exc}") from exc
    if worst > tol:
        raise NotInFamily(
            f"operator {D.name} is not in the characterized family at x={x} "
            f"(verification misfit {worst:.3e} > {tol:g})")
    return Recovery(x, c0, c1, c2, d00, worst)


def recover_over_points(D: Operator, points: Sequence[float], **kw) -> list[Recovery]:
    return [recover_coefficients(D, x, **kw) for x in points]

