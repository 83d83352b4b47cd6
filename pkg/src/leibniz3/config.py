"""Run configuration: an INI-style file with one ``[run]`` section and
repeated ``[operator.NAME]`` sections.

Example::

    [run]
    suites = identities, counterexample
    corpus = square, sin, two_plus_sin
    points_per_check = 16
    seed = 7
    tolerance = 1e-9
    report_path = report.json
    format = json

    [operator.mixed]
    family = characterized
    c0 = 1
    c1 = x
    c2 = 3
    d00 = 4
    k = 2
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .corpus import builtin_corpus
from .counterexample import PsiSolution, build_d, cubic_seed, phi_quadratic_seed
from .operators import (
    Characterized,
    CoeffFn,
    Composition,
    LinearDifferential,
    LogPolynomial,
    Operator,
    SecondDerivativeOnly,
)

SUITES = ("identities", "faa", "aichinger", "recover", "counterexample")
FORMATS = ("json", "csv")

NAMED_COEFFS = {
    "x": lambda x: x,
    "x^2": lambda x: x * x,
    "1+x^2": lambda x: 1.0 + x * x,
    "2-x": lambda x: 2.0 - x,
    "sin(x)": math.sin,
    "cos(x)": math.cos,
    "exp(x)": math.exp,
    "exp(-x^2)": lambda x: math.exp(-x * x),
}


class ConfigError(ValueError):
    pass


def parse_coeff(text: str) -> CoeffFn:
    text = text.strip().replace(" ", "")
    if text in NAMED_COEFFS:
        return CoeffFn.from_callable(NAMED_COEFFS[text], text)
    try:
        return CoeffFn.constant(float(text))
    except ValueError:
        raise ConfigError(f"unknown coefficient {text!r}; use a number or one of "
                          f"{', '.join(NAMED_COEFFS)}") from None


def build_operator(name: str, spec: dict[str, str]) -> Operator:
    """Construct an operator from a flat key/value descriptor."""
    family = spec.get("family", "").strip()
    get = lambda key, default="0": parse_coeff(spec.get(key, default))  # noqa: E731
    try:
        if family == "characterized":
            return Characterized(get("c0"), get("c1"), get("c2"), get("d00"),
                                 k=int(spec.get("k", "2")), name=name)
        if family == "linear_differential":
            return LinearDifferential(get("c1"), get("c2"), k=int(spec.get("k", "2")), name=name)
        if family == "second_derivative":
            return SecondDerivativeOnly(get("c2", "1"), name=name)
        if family == "log_polynomial":
            k = int(spec.get("k", "2"))
            c = tuple(get(f"c{i}") for i in range(k + 1))
            d = tuple(tuple(get(f"d{i}{j}") for j in range(k + 1)) for i in range(k + 1))
            return LogPolynomial(c, d, name=name)
        if family == "composition":
            seeds = {"cubic": (cubic_seed, "u^3"), "phi_quadratic": (phi_quadratic_seed, "e^2u")}
            seed_name = spec.get("seed", "cubic").strip()
            if seed_name not in seeds:
                raise ConfigError(f"unknown composition seed {seed_name!r}")
            return Composition(build_d(PsiSolution(*seeds[seed_name])), name=name)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"operator {name!r}: {exc}") from exc
    raise ConfigError(f"operator {name!r}: unknown family {family!r}")


def _char(name, c0=0, c1=0, c2=0, d00=0, k=2) -> tuple[str, dict[str, str]]:
    spec = {"family": "characterized", "c0": str(c0), "c1": str(c1), "c2": str(c2),
            "d00": str(d00), "k": str(k)}
    return name, spec


DEFAULT_OPERATORS: list[tuple[str, dict[str, str]]] = [
    _char("char_1234", 1, 2, 3, 4),
    _char("char_c0", c0=1),
    _char("char_d00", d00=1),
    _char("char_c2", c2=1),
    _char("char_mixed_signs", -0.5, 1.5, -2, 0.25),
    _char("char_k1", 1, -1, 0, 2, k=1),
    _char("char_k1_c1", 0.3, 2, 0, 0, k=1),
    _char("char_k0", 1, 0, 0, -1, k=0),
    _char("char_k0_d00", d00=3, k=0),
    _char("char_var_a", "sin(x)", "x", "1+x^2", "cos(x)"),
    _char("char_var_b", "exp(-x^2)", "x^2", "cos(x)", "2-x"),
    _char("char_var_k1", "x", "sin(x)", 0, "exp(-x^2)", k=1),
    ("second_derivative", {"family": "second_derivative", "c2": "1"}),
    ("first_derivative", {"family": "linear_differential", "c1": "1", "c2": "0"}),
    ("log_poly", {"family": "log_polynomial", "k": "2", "c0": "0.5", "c1": "-1", "c2": "0.7",
                  "d00": "1", "d01": "0.4", "d11": "-0.3", "d12": "0.2", "d22": "0.1"}),
]


@dataclass
class RunConfig:
    suites: list[str] = field(default_factory=lambda: list(SUITES))
    corpus: list[str] = field(default_factory=lambda: [f.name for f in builtin_corpus()])
    operators: list[tuple[str, dict[str, str]]] = field(
        default_factory=lambda: list(DEFAULT_OPERATORS))
    points_per_check: int = 16
    triples: int = 20
    seed: int = 12345
    tolerance: float = 1e-9
    report_path: Optional[str] = None
    format: str = "json"

    def validate(self) -> None:
        if not self.suites:
            raise ConfigError("at least one suite is required")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suites {bad}; choose from {list(SUITES)}")
        if not self.tolerance > 0 or not math.isfinite(self.tolerance):
            raise ConfigError(f"tolerance must be a positive number, got {self.tolerance}")
        if self.points_per_check < 1 or self.triples < 1:
            raise ConfigError("points_per_check and triples must be >= 1")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        known = {f.name for f in builtin_corpus()}
        unknown = [n for n in self.corpus if n not in known]
        if unknown:
            raise ConfigError(f"unknown corpus functions {unknown}")
        if not self.corpus:
            raise ConfigError("corpus must not be empty")
        self.build_operators()

    def build_operators(self) -> list[Operator]:
        return [build_operator(name, spec) for name, spec in self.operators]


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.replace("\n", ",").split(",") if t.strip()]


def load_config(path: str | Path) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    cfg = RunConfig()
    if parser.has_section("run"):
        run = parser["run"]
        try:
            if "suites" in run:
                cfg.suites = _split(run["suites"])
            if "corpus" in run:
                cfg.corpus = _split(run["corpus"])
            cfg.points_per_check = run.getint("points_per_check", cfg.points_per_check)
            cfg.triples = run.getint("triples", cfg.triples)
            cfg.seed = run.getint("seed", cfg.seed)
            cfg.tolerance = run.getfloat("tolerance", cfg.tolerance)
        except ValueError as exc:
            raise ConfigError(f"bad value in [run]: {exc}") from exc
        cfg.report_path = run.get("report_path", cfg.report_path)
        cfg.format = run.get("format", cfg.format).strip()
    ops = [(s.split(".", 1)[1], dict(parser[s])) for s in parser.sections()
           if s.startswith("operator.")]
    if ops:
        cfg.operators = ops
    cfg.validate()
    return cfg
