"""A composition operator that satisfies the diagonal identity but not the trilinear one.

Take a solution ``phi`` of ``phi(3t) = 3 phi(2t) - 3 phi(t)`` on ``(1, inf)``
that is not a polynomial of degree <= 2, and set ``d(x) = x phi(ln x)`` on
``(e, inf)``. Then ``D(f) = d o f`` satisfies

    D(f^3) - 3 f D(f^2) + 3 f^2 D(f) = f^3 [phi(3L) - 3 phi(2L) + 3 phi(L)] = 0,
    L = ln f,

while the seven-term trilinear expression on constants ``x, y, z`` equals
``xyz`` times the cube expression of ``phi`` at ``(ln x, ln y, ln z)``, which
is nonzero somewhere.

In log coordinates ``phi(t) = psi(ln t)`` the equation reads
``psi(u + ln 3) = 3 psi(u + ln 2) - 3 psi(u)`` for ``u >= 0``. Any seed on
``[0, ln 3)`` extends uniquely by stepping back with

    psi(u) = 3 psi(u - (ln 3 - ln 2)) - 3 psi(u - ln 3)      (u >= ln 3).

Because ln 2 and ln 3 are incommensurable no grid is closed under both
shifts, so values are computed pointwise. The extension is not smoothed at
the seam ``u = ln 3``.
"""

from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .aichinger import QuadraticModel, fit_quadratic
from .corpus import DomainSet, FunctionSpec, ScalarMap
from .errors import DomainError, PreconditionError
from .jet import Jet
from .operators import Composition, Residual, id2_terms, powers_terms

S2 = math.log(2.0)
S3 = math.log(3.0)
GAP = S3 - S2
U_CAP = 64.0


def cubic_seed(u: float) -> float:
    return u**3


def phi_quadratic_seed(u: float) -> float:
    """Seed for which the extension is ``phi(t) = t^2`` exactly."""
    return math.exp(2.0 * u)


class PsiSolution:
    """Pointwise extension of a seed on ``[0, ln 3)`` to a solution on ``[0, U_CAP]``.

    Thread-safe: the memo is guarded by a lock.
    """

    def __init__(self, seed: Callable[[float], float] = cubic_seed, name: str = "u^3"):
        self.seed = seed
        self.name = name
        self.s2 = S2
        self.s3 = S3
        self._memo: dict[float, float] = {}
        self._lock = threading.Lock()

    def __call__(self, u: float) -> float:
        return psi_eval(self, u)

    def phi(self, t: float) -> float:
        if not t > 1.0:
            raise DomainError(f"phi is defined on (1, inf), got {t}")
        return psi_eval(self, math.log(t))

    def recurrence_residual(self, u: float) -> Residual:
        terms = (psi_eval(self, u + self.s3), -3.0 * psi_eval(self, u + self.s2),
                 3.0 * psi_eval(self, u))
        return Residual(math.fsum(terms), terms)


def psi_eval(sol: PsiSolution, u: float) -> float:
    if u < 0:
        raise DomainError(f"psi needs u >= 0, got {u}")
    if u > U_CAP:
        raise DomainError(f"psi queries are capped at u <= {U_CAP}, got {u}")
    with sol._lock:
        if u in sol._memo:
            return sol._memo[u]
    if u < sol.s3:
        val = sol.seed(u)
    else:
        # node (i, j) stands for psi(u - i*GAP - j*s3); computing the argument
        # from (i, j) makes equal paths land on bit-identical floats
        nodes: dict[tuple[int, int], float] = {}
        gap = sol.s3 - sol.s2

        def node(i: int, j: int) -> float:
            key = (i, j)
            if key not in nodes:
                arg = u - (i * gap + j * sol.s3)
                if arg < sol.s3:
                    nodes[key] = sol.seed(max(arg, 0.0))
                else:
                    nodes[key] = 3.0 * node(i + 1, j) - 3.0 * node(i, j + 1)
            return nodes[key]

        val = node(0, 0)
    with sol._lock:
        sol._memo[u] = val
    return val


def build_d(sol: PsiSolution) -> ScalarMap:
    """``d(x) = x psi(ln ln x)`` on ``(e, inf)``."""

    def d(x: float) -> float:
        if not x > math.e:
            raise DomainError(f"d is defined on (e, inf), got {x}")
        return x * psi_eval(sol, math.log(math.log(x)))

    return ScalarMap(f"d[{sol.name}]", d, DomainSet.interval(math.e, math.inf))


def cube_relation_residual(d: ScalarMap, x: float) -> Residual:
    """``d(x^3) - 3x d(x^2) + 3x^2 d(x)``, zero for every ``x > e``."""
    terms = (d(x**3), -3.0 * x * d(x**2), 3.0 * x * x * d(x))
    return Residual(math.fsum(terms), terms)


def residual_powers_composition(d: ScalarMap, f: FunctionSpec, x: float) -> Residual:
    j = f.jet_at(x, 0)
    if not j[0] > math.e:
        raise DomainError(f"f(x) = {j[0]} must exceed e")
    terms = powers_terms(Composition(d), x, j)
    return Residual(math.fsum(terms), tuple(terms))


def id2_constants(d: ScalarMap, a: float, b: float, c: float) -> Residual:
    """Seven-term trilinear expression of ``d o .`` on constant functions."""
    terms = id2_terms(Composition(d), 0.0, Jet((a,)), Jet((b,)), Jet((c,)))
    return Residual(math.fsum(terms), tuple(terms))


@dataclass(frozen=True)
class Violation:
    x: float
    y: float
    z: float
    residual: float
    trial: int


def find_violation_triple(d: ScalarMap, seed: int = 0, trials: int = 1000,
                          threshold: float = 1e-6, hi: float = 20.0) -> Violation:
    """First seeded triple in ``(e, hi)^3`` whose trilinear residual exceeds ``threshold``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not threshold > 0:
        raise ValueError("threshold must be > 0")
    rng = random.Random(seed)
    for t in range(trials):
        x, y, z = (rng.uniform(math.e, hi) for _ in range(3))
        r = id2_constants(d, x, y, z)
        if abs(r.value) > threshold:
            return Violation(x, y, z, r.value, t)
    raise PreconditionError(f"no violation found in {trials} trials (threshold {threshold:g})")


def cube_phi(sol: PsiSolution, a: float, b: float, c: float) -> Residual:
    """Seven-term cube expression of ``phi`` at ``(a, b, c)``."""
    if min(a, b, c) <= 1.0:
        raise DomainError("cube_phi needs a, b, c > 1")
    phi = sol.phi
    terms = (phi(a + b + c), -phi(a + b), -phi(a + c), -phi(b + c), phi(a), phi(b), phi(c))
    return Residual(math.fsum(terms), terms)


def phi_quadratic_fit(sol: PsiSolution, lo: float = 1.0, hi: float = 10.0, count: int = 200,
                      seed: int = 0) -> QuadraticModel:
    """Fit ``phi`` on ``(lo, hi)`` by a quadratic, with ``t`` mapped affinely onto [-1, 1]."""
    rng = random.Random(seed)
    ts = sorted(rng.uniform(lo, hi) for _ in range(count))
    mid, half = (hi + lo) / 2.0, (hi - lo) / 2.0
    return fit_quadratic([((( t - mid) / half,), sol.phi(t)) for t in ts], 1)


def nonlinearity_witness(d: ScalarMap, f: float, g: float) -> float:
    """``d(f + g) - d(f) - d(g)`` for constant inputs."""
    return d(f + g) - d(f) - d(g)


def recurrence_sweep(sol: PsiSolution, points: Sequence[float]) -> float:
    return max(sol.recurrence_residual(u).scaled for u in points)


def sample_u(n: int, seed: int, hi: float = 5.0) -> list[float]:
    rng = np.random.default_rng(seed)
    return [float(u) for u in rng.uniform(0.0, hi, size=n)]
