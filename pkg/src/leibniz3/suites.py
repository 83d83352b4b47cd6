"""Verification suites producing :class:`ResidualReport` objects.

Each case draws its random inputs from a seed derived from
``(global seed, suite index, case index)``, so results do not depend on the
order in which cases run.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from typing import Callable, Iterable, Sequence

import numpy as np

from . import aichinger as ai
from . import counterexample as cx
from .corpus import (
    DEFAULT_MARGIN,
    DomainSet,
    FunctionSpec,
    builtin_corpus,
    lookup,
    polynomial,
    sample_points,
    sum_,
)
from .errors import NotInFamily, PreconditionError
from .faa import faa_ln_derivative, partitions
from .jet import Jet, jet_add, jet_const, jet_div, jet_exp, jet_ln, jet_var
from .operators import (
    BlackBoxPointwise,
    Characterized,
    CoeffFn,
    Composition,
    KMPair,
    LinearDifferential,
    LogPolynomial,
    Operator,
    SecondDerivativeOnly,
    km_pair,
    km_pair_printed,
    leibniz_family,
    log_pair,
    powers_terms,
    residual_eq_rem2,
    residual_id2,
    residual_leibniz,
    residual_powers,
    residual_second_leibniz,
    shift_commutator,
    difference_apply,
    localization_check,
    apply,
)
from .report import CaseResult, ResidualReport, Worst

POSITIVE_NAMES = ("const_one", "const_e", "const_four", "three_plus_x2", "exp_1x",
                  "exp_-0.5x", "lorentzian", "two_plus_sin")

SUITE_INDEX = {"identities": 0, "faa": 1, "aichinger": 2, "recover": 3, "counterexample": 4}

RECOVER_TOL = 1e-8
FIT_TOL = 1e-8
RECURRENCE_TOL = 1e-10
NONQUADRATIC_THRESHOLD = 0.01
VIOLATION_THRESHOLD = 1e-6


def derive_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed % 2**63, *keys]).generate_state(1)[0])


class _Seeds:
    def __init__(self, seed: int, suite: str):
        self.seed = seed
        self.suite = SUITE_INDEX[suite]
        self.case = 0

    def next(self) -> int:
        self.case += 1
        return derive_seed(self.seed, self.suite, self.case)


def _points_for(fs: Sequence[FunctionSpec], n: int, seed: int,
                domain: DomainSet | None = None) -> list[float]:
    dom = domain or DomainSet.real_line()
    for f in fs:
        dom = dom.intersect(f.domain)
    avoid = sorted({z for f in fs for z in f.zero_set_hint})
    return sample_points(dom, n, seed, margin=DEFAULT_MARGIN, avoid=avoid)


def coefficient_fns(op: Operator) -> list[CoeffFn]:
    if isinstance(op, Characterized):
        return list(op.coefficients)
    if isinstance(op, LinearDifferential):
        return [op.c1, op.c2]
    if isinstance(op, SecondDerivativeOnly):
        return [op.c2]
    if isinstance(op, LogPolynomial):
        return list(op.c) + [c for row in op.d for c in row]
    return []


def _pool_for(op: Operator, corpus: list[FunctionSpec]) -> list[FunctionSpec]:
    if isinstance(op, LogPolynomial):
        return [f for f in corpus if f.name in POSITIVE_NAMES]
    return corpus


def bump_outside(radius: float = 1.0) -> FunctionSpec:
    """Smooth function vanishing on ``[-radius, radius]``: ``exp(-1/(|x| - radius))`` outside."""

    def jet_fn(x: float, k: int) -> Jet:
        if abs(x) <= radius:
            return jet_const(0.0, k)
        t = jet_var(x, k)
        dist = jet_add(t, jet_const(-radius, k)) if x > 0 else jet_add(-t, jet_const(-radius, k))
        return jet_exp(jet_div(jet_const(-1.0, k), dist))

    return FunctionSpec("bump", DomainSet.real_line(), jet_fn)


def cubic_form_of_A3(D: Operator) -> BlackBoxPointwise:
    """``l -> A3(l, l, l)`` for ``D`` as a pointwise map (the diagonal identity residual)."""
    return BlackBoxPointwise(lambda x, j: math.fsum(powers_terms(D, x, j)), order=D.order,
                             name=f"A3diag[{D.name}]")


def third_derivative() -> BlackBoxPointwise:
    return BlackBoxPointwise(lambda x, j: j[3], order=3, name="third_derivative")


def _timed(fn):
    def wrapper(*args, **kw) -> ResidualReport:
        t0 = time.perf_counter()
        rep = fn(*args, **kw)
        rep.wall_time = time.perf_counter() - t0
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ----------------------------------------------------------------------------
# identities


def _triples(pool: list[FunctionSpec], count: int, rng: random.Random):
    return [tuple(rng.choice(pool) for _ in range(3)) for _ in range(count)]


def _pairs(pool: list[FunctionSpec], count: int, rng: random.Random):
    return [tuple(rng.choice(pool) for _ in range(2)) for _ in range(count)]


def _sweep(name: str, opname: str, groups, n: int, seeds: _Seeds, tol: float,
           residual: Callable, **case_kw) -> CaseResult:
    w = Worst()
    labels = []
    for fs in groups:
        labels.append(",".join(f.name for f in fs))
        for x in _points_for(fs, n, seeds.next()):
            w.add_residual(residual(*fs, x))
    return w.case(name, opname, labels, tol, **case_kw)


@_timed
def identities_suite(ops: list[Operator], corpus: list[FunctionSpec], seed: int,
                     tol: float = 1e-9, n_points: int = 16, n_triples: int = 20) -> ResidualReport:
    """Trilinear and diagonal identities, Leibniz-type rules, and structural checks."""
    rep = ResidualReport("identities", seed)
    seeds = _Seeds(seed, "identities")
    positive = [f for f in corpus if f.name in POSITIVE_NAMES] or \
        [lookup(n) for n in POSITIVE_NAMES]

    for op in ops:
        if isinstance(op, Composition):
            rep.cases.append(CaseResult(f"id2/{op.name}", op.name, [], 0, 0.0, 1.0, tol,
                                        note="composition operators run in the counterexample suite"))
            continue
        pool = _pool_for(op, corpus) or positive
        rng = random.Random(seeds.next())
        groups = _triples(pool, n_triples, rng)
        rep.cases.append(_sweep(f"id2/{op.name}", op.name, groups, n_points, seeds, tol,
                                lambda f, g, h, x, op=op: residual_id2(op, f, g, h, x)))
        singles = [(f,) for f in pool]
        rep.cases.append(_sweep(f"id_powers/{op.name}", op.name, singles, n_points, seeds, tol,
                                lambda f, x, op=op: residual_powers(op, f, x)))

        w = Worst()
        for (f,) in singles:
            for x in _points_for([f], 4, seeds.next()):
                a, b = residual_powers(op, f, x), residual_id2(op, f, f, f, x)
                w.add(a.value - b.value, max(a.scale, b.scale))
        rep.cases.append(w.case(f"powers_vs_id2/{op.name}", op.name,
                                [f.name for (f,) in singles], 1e-13))

        rep.cases.append(_unit_constants_case(op, seeds))
        rep.cases.append(_localization_case(op, seeds, n_points))
        rep.cases.append(_isotropy_case(op, pool, seeds, tol))

    rep.cases.extend(_leibniz_cases(corpus, seeds, tol, n_points, n_triples))
    rep.cases.append(_difference_constant_case(corpus, seeds, tol, n_points))
    return rep


def _unit_constants_case(op: Operator, seeds: _Seeds) -> CaseResult:
    w = Worst()
    names = ["const_one", "const_minus_one"]
    note = ""
    if isinstance(op, LogPolynomial):
        names, note = ["const_one"], "f = -1 lies outside the positive-function domain"
    pts = sample_points(DomainSet.interval(-3, 3), 8, seeds.next())
    for nm in names:
        f = lookup(nm)
        for x in pts:
            w.add(apply(op, f, x), 1.0)
    return w.case(f"unit_constants/{op.name}", op.name, names, 0.0, note=note)


def _localization_case(op: Operator, seeds: _Seeds, n: int) -> CaseResult:
    base = polynomial("three_plus_x2", [3, 0, 1]) if isinstance(op, LogPolynomial) \
        else polynomial("square", [0, 0, 1])
    bump = bump_outside(1.0)
    f2 = sum_(base, bump)
    pts = sample_points(DomainSet.interval(-1.0, 1.0), n, seeds.next())
    worst = localization_check(op, base, f2, (-1.0, 1.0), pts)
    outside = [1.5, -2.0, 2.5]
    differs = max(abs(apply(op, base, x) - apply(op, f2, x)) for x in outside)
    return CaseResult(f"localization/{op.name}", op.name, [base.name, f2.name], len(pts),
                      worst, 1.0, 0.0, measured={"max_outside_J": differs})


def _isotropy_case(op: Operator, pool: list[FunctionSpec], seeds: _Seeds,
                   tol: float) -> CaseResult:
    constant = all(c.is_constant for c in coefficient_fns(op))
    rng = random.Random(seeds.next())
    line = [f for f in pool if f.domain == DomainSet.real_line()]
    w = Worst()
    used = []
    for _ in range(16):
        f = rng.choice(line)
        x, s = rng.uniform(-2.0, 2.0), rng.uniform(-1.5, 1.5)
        used.append(f.name)
        w.add_residual(shift_commutator(op, s, f, x))
    return w.case(f"isotropy/{op.name}", op.name, sorted(set(used)), tol,
                  expect="holds" if constant else "violation",
                  note="" if constant else "non-constant coefficients break shift invariance")


def _leibniz_cases(corpus, seeds: _Seeds, tol: float, n: int, count: int) -> list[CaseResult]:
    out = []
    rng = random.Random(seeds.next())
    pairs = _pairs(corpus, count, rng)
    triples = _triples(corpus, count, rng)

    for T in (leibniz_family(1.5, -0.7),
              Characterized(c0=CoeffFn.from_callable(math.sin, "sin(x)"),
                            c1=CoeffFn.from_callable(lambda x: x, "x"), name="leibniz_family_var")):
        out.append(_sweep(f"leibniz/{T.name}", T.name, pairs, n, seeds, tol,
                          lambda f, g, x, T=T: residual_leibniz(T, f, g, x)))
    d2 = SecondDerivativeOnly(name="second_derivative")
    out.append(_sweep("leibniz/second_derivative", d2.name, pairs, n, seeds, tol,
                      lambda f, g, x: residual_leibniz(d2, f, g, x), expect="violation",
                      note="negative control: f'' does not obey the Leibniz rule"))

    var_pair = km_pair(CoeffFn.from_callable(lambda x: x, "x"),
                       CoeffFn.from_callable(math.cos, "cos(x)"))
    identity_A = KMPair(
        BlackBoxPointwise(lambda x, j: j[1] - 2.0 * j[0], order=1, name="f'-2f"),
        BlackBoxPointwise(lambda x, j: j[0], order=0, name="identity"),
        name="identity_A_pair")
    for pair in (log_pair(), km_pair(0.5, 1.3), var_pair, identity_A):
        out.append(_sweep(f"second_leibniz/{pair.name}", pair.name, pairs, n, seeds, tol,
                          lambda f, g, x, p=pair: residual_second_leibniz(p, f, g, x)))
    printed = km_pair_printed(0.5, 1.3)
    out.append(_sweep(f"second_leibniz/{printed.name}", printed.name, pairs, n, seeds, tol,
                      lambda f, g, x: residual_second_leibniz(printed, f, g, x),
                      expect="violation",
                      note="T = c^2/2 f'' + b f' with A = c f' leaves -c^2 f' g'; "
                           "the rule holds for T = c^2 f'' + b f'"))
    for pair in (log_pair(), km_pair(0.5, 1.3), identity_A):
        out.append(_sweep(f"eq_rem2/{pair.name}", pair.name, triples, n, seeds, tol,
                          lambda f, g, h, x, p=pair: residual_eq_rem2(p, f, g, h, x)))
    out.append(_sweep(f"eq_rem2/{printed.name}", printed.name, triples, n, seeds, tol,
                      lambda f, g, h, x: residual_eq_rem2(printed, f, g, h, x, check=False),
                      note="second-order rule precondition fails for this pair; both sides "
                           "vanish separately"))
    return out


def _difference_constant_case(corpus, seeds: _Seeds, tol: float, n: int) -> CaseResult:
    """Measure ``Delta_{f,g,h} C(0) / A3(f,g,h)`` for ``C(l) = A3(l,l,l)``.

    ``D = f'''`` is linear but fails the trilinear identity, so ``A3`` is a
    genuinely nonzero symmetric trilinear map and the ratio is observable.
    """
    D = third_derivative()
    C = cubic_form_of_A3(D)
    zero = FunctionSpec("zero", DomainSet.real_line(), lambda x, k: jet_const(0.0, k))
    rng = random.Random(seeds.next())
    smooth = [f for f in corpus if f.domain == DomainSet.real_line()
              and f.name not in ("const_one", "const_minus_one", "const_e", "const_four")]
    ratios = []
    labels = []
    for f, g, h in _triples(smooth, 8, rng):
        labels.append(f"{f.name},{g.name},{h.name}")
        for x in _points_for([f, g, h], max(2, n // 4), seeds.next()):
            a3 = residual_id2(D, f, g, h, x)
            if abs(a3.value) < 1e-6 * max(1.0, a3.scale):
                continue
            ratios.append(difference_apply(C, (f, g, h), zero, x) / a3.value)
    mean = math.fsum(ratios) / len(ratios)
    spread = max(abs(r - mean) for r in ratios)
    nearest = min((6, 720), key=lambda c: abs(c - mean))
    return CaseResult("difference_constant", C.name, labels, len(ratios), spread,
                      max(1.0, abs(mean)), tol,
                      measured={"constant": mean, "nearest_candidate": nearest,
                                "candidates": [6, 720]},
                      note="pass means the ratio is the same constant at every sample")


# ----------------------------------------------------------------------------
# Faa di Bruno


def brute_force_partition_count(l: int) -> int:  # noqa: E741
    """Count vectors ``m`` with ``sum_i i*m_i = l`` by scanning a box."""
    ranges = [range(l // i + 1) for i in range(1, l + 1)]
    return sum(1 for m in itertools.product(*ranges)
               if sum((i + 1) * v for i, v in enumerate(m)) == l)


def random_positive_jet(rng: random.Random, order: int) -> Jet:
    return Jet((rng.uniform(0.5, 3.0),) + tuple(rng.uniform(-2.0, 2.0) for _ in range(order)))


@_timed
def faa_suite(seed: int, tol: float = 1e-9, n_jets: int = 64, max_l: int = 6) -> ResidualReport:
    rep = ResidualReport("faa", seed)
    seeds = _Seeds(seed, "faa")
    for l in range(1, max_l + 1):  # noqa: E741
        rng = random.Random(seeds.next())
        w = Worst()
        for _ in range(n_jets):
            j = random_positive_jet(rng, l)
            want = jet_ln(j)[l]
            w.add(faa_ln_derivative(j, l) - want, abs(want))
        rep.cases.append(w.case(f"faa_vs_jet_ln/l={l}", "ln", [f"random_jet_l{l}"], tol))
    counts = [len(partitions(l)) for l in range(1, max_l + 1)]
    brute = [brute_force_partition_count(l) for l in range(1, max_l + 1)]
    mismatch = sum(abs(a - b) for a, b in zip(counts, brute))
    rep.cases.append(CaseResult("partition_counts", "partitions", [], max_l, float(mismatch), 1.0,
                                0.0, measured={"recursive": counts, "brute_force": brute}))
    return rep


# ----------------------------------------------------------------------------
# Aichinger


def norm_cubed(x: float, v: Sequence[float]) -> float:
    return math.sqrt(sum(t * t for t in v)) ** 3


@_timed
def aichinger_suite(ops: list[Operator], seed: int, tol: float = 1e-9,
                    n_triples: int = 64, n_fit: int = 50) -> ResidualReport:
    rep = ResidualReport("aichinger", seed)
    seeds = _Seeds(seed, "aichinger")
    for op in ops:
        if not isinstance(op, (Characterized, LinearDifferential, SecondDerivativeOnly)):
            continue
        G = ai.induced_symbol(op)
        rng = random.Random(seeds.next())
        w = Worst()
        for _ in range(n_triples):
            x = rng.uniform(-2.0, 2.0)
            vs = [tuple(rng.uniform(-1.0, 1.0) for _ in range(G.n)) for _ in range(3)]
            w.add_residual(ai.cube_residual(G, x, *vs))
        rep.cases.append(w.case(f"cube/{op.name}", op.name, [f"G_n{G.n}"], tol))
        w = Worst()
        origin = Worst()
        for x in sample_points(DomainSet.interval(-2, 2), 4, seeds.next()):
            model = ai.fit_symbol(G, x, n_fit, seeds.next())
            w.add(model.residual, 1.0)
            origin.add(G(x, (0.0,) * G.n), 1.0)
        rep.cases.append(w.case(f"quadratic_fit/{op.name}", op.name, [f"G_n{G.n}"], FIT_TOL))
        rep.cases.append(origin.case(f"G_at_origin/{op.name}", op.name, [f"G_n{G.n}"], 0.0))
    G3 = ai.SymbolG(2, norm_cubed)
    model = ai.fit_symbol(G3, 0.0, n_fit, seeds.next())
    rep.cases.append(CaseResult("quadratic_fit/norm_cubed", "|v|^3", ["G_n2"], n_fit,
                                model.residual, 1.0, NONQUADRATIC_THRESHOLD, expect="violation",
                                note="non-quadratic control"))
    return rep


# ----------------------------------------------------------------------------
# recovery


def _true_coefficients(op: Operator, x: float) -> tuple[float, float, float, float]:
    if isinstance(op, Characterized):
        return tuple(c(x) for c in op.coefficients)
    if isinstance(op, LinearDifferential):
        return 0.0, op.c1(x), op.c2(x), 0.0
    if isinstance(op, SecondDerivativeOnly):
        return 0.0, 0.0, op.c2(x), 0.0
    raise TypeError(f"{op.name} has no closed-form coefficients")


@_timed
def recover_suite(ops: list[Operator], seed: int, n_points: int = 16,
                  max_ops: int = 8) -> ResidualReport:
    rep = ResidualReport("recover", seed)
    seeds = _Seeds(seed, "recover")
    family = [op for op in ops if isinstance(op, Characterized)][-max_ops:]
    for op in family:
        w = Worst()
        verify = 0.0
        pts = sample_points(DomainSet.interval(-3, 3), n_points, seeds.next())
        for x in pts:
            rec = ai.recover_coefficients(op, x, seed=seeds.next())
            verify = max(verify, rec.verify_residual)
            for got, want in zip(rec.coefficients, _true_coefficients(op, x)):
                w.add(got - want, abs(want))
        rep.cases.append(w.case(f"round_trip/{op.name}", op.name, [], RECOVER_TOL,
                                measured={"max_verify_residual": verify}))
    outsiders = [op for op in ops if isinstance(op, (Composition, LogPolynomial))]
    outsiders.append(Composition(cx.build_d(cx.PsiSolution()), name="counterexample"))
    seen = set()
    for op in outsiders:
        if op.name in seen:
            continue
        seen.add(op.name)
        try:
            ai.recover_coefficients(op, 0.5, seed=seeds.next())
            rejected, reason = False, ""
        except NotInFamily as exc:
            rejected, reason = True, str(exc)
        rep.cases.append(CaseResult(f"reject/{op.name}", op.name, [], 1, float(rejected), 1.0,
                                    0.5, expect="violation", measured={"rejected": rejected},
                                    note=reason))
    return rep


# ----------------------------------------------------------------------------
# counterexample


def _above_e_functions() -> list[tuple[FunctionSpec, DomainSet]]:
    return [
        (lookup("const_four"), DomainSet.real_line()),
        (lookup("three_plus_x2"), DomainSet.real_line()),
        (lookup("exp_1x"), DomainSet.interval(1.0 + 1e-3, 4.0)),
        (polynomial("x_plus_4", [4, 1]), DomainSet.interval(-1.2, 4.0)),
    ]


@_timed
def counterexample_suite(seed: int, tol: float = 1e-9, n_points: int = 16,
                         trials: int = 1000) -> ResidualReport:
    rep = ResidualReport("counterexample", seed)
    seeds = _Seeds(seed, "counterexample")
    sol = cx.PsiSolution()
    d = cx.build_d(sol)

    w = Worst()
    for u in cx.sample_u(128, seeds.next()):
        w.add_residual(sol.recurrence_residual(u))
    rep.cases.append(w.case("psi_recurrence", sol.name, [], RECURRENCE_TOL))

    w = Worst()
    rng = random.Random(seeds.next())
    for _ in range(n_points):
        w.add_residual(cx.cube_relation_residual(d, rng.uniform(math.e + 1e-3, 20.0)))
    rep.cases.append(w.case("d_cube_relation", d.name, [], tol))

    w = Worst()
    names = []
    for f, window in _above_e_functions():
        names.append(f.name)
        for x in sample_points(window.intersect(f.domain), n_points, seeds.next()):
            w.add_residual(cx.residual_powers_composition(d, f, x))
    rep.cases.append(w.case("id_powers/composition", d.name, names, tol))

    try:
        v = cx.find_violation_triple(d, seeds.next(), trials, VIOLATION_THRESHOLD)
        found = {"x": v.x, "y": v.y, "z": v.z, "residual": v.residual, "trial": v.trial}
        res = abs(v.residual)
        phi_cube = cx.cube_phi(sol, math.log(v.x), math.log(v.y), math.log(v.z)).value \
            if min(v.x, v.y, v.z) > math.e else float("nan")
        found["phi_cube"] = phi_cube
    except PreconditionError:
        found, res = None, 0.0
    rep.cases.append(CaseResult("id2/composition", d.name, ["const_x*", "const_y*", "const_z*"],
                                trials, res, 1.0, VIOLATION_THRESHOLD, expect="violation",
                                measured=found))

    model = cx.phi_quadratic_fit(sol, seed=seeds.next())
    rep.cases.append(CaseResult("phi_quadratic_fit", sol.name, [], 200, model.residual, 1.0,
                                NONQUADRATIC_THRESHOLD, expect="violation",
                                note="phi is not a polynomial of degree <= 2"))

    wit = cx.nonlinearity_witness(d, 4.0, 5.0)
    rep.cases.append(CaseResult("nonlinearity", d.name, ["const_4", "const_5"], 1, abs(wit), 1.0,
                                tol, expect="violation"))

    quad = cx.PsiSolution(cx.phi_quadratic_seed, "e^2u")
    dq = cx.build_d(quad)
    w = Worst()
    rng = random.Random(seeds.next())
    for _ in range(trials):
        w.add_residual(cx.id2_constants(dq, *(rng.uniform(math.e, 20.0) for _ in range(3))))
    rep.cases.append(w.case("id2/quadratic_phi_control", dq.name, [], tol,
                            note="phi(t) = t^2 solves the trilinear identity too"))
    return rep


def run_suites(names: Iterable[str], ops: list[Operator], corpus: list[FunctionSpec], seed: int,
               tol: float, n_points: int = 16, n_triples: int = 20) -> list[ResidualReport]:
    out = []
    for name in names:
        if name == "identities":
            out.append(identities_suite(ops, corpus, seed, tol, n_points, n_triples))
        elif name == "faa":
            out.append(faa_suite(seed, tol))
        elif name == "aichinger":
            out.append(aichinger_suite(ops, seed, tol))
        elif name == "recover":
            out.append(recover_suite(ops, seed, n_points))
        elif name == "counterexample":
            out.append(counterexample_suite(seed, tol, n_points))
        else:
            raise ValueError(f"unknown suite {name!r}")
    return out


def default_corpus(names: Sequence[str] | None = None) -> list[FunctionSpec]:
    corpus = builtin_corpus()
    if names is None:
        return corpus
    return [lookup(n, corpus) for n in names]
