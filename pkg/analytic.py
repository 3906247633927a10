"""
Módulo Analítico

Este módulo gerencia o lado complexo-analítico do TropMap,
incluindo:
- Cadeias parametrizadas em (C*)^n descritas por árvores de expressões
- O pullback -ε log|·|* de superformas avaliado em referenciais tangentes
- Integrais em ε com quadratura adaptativa e extrapolação de Richardson
- Integrais logarítmicas ∧ -(1/2πi) d log χ^m e verificação de racionalidade
- Mapas de face para cartas com estrutura produto declarada
"""

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Optional, Sequence

import numpy as np
import sympy
from loguru import logger

from config import EpsSchedule, QuadratureCfg
from exact_linalg import rational_reconstruct, xgcd
from exceptions import (
    ChartMismatchError,
    DegreeError,
    DivergentIntegralError,
    FaceMapUnavailableError,
    NonAdmissibleChartError,
    NonConvergenceError,
    NotClosedError,
    OutsideNeighborhoodError,
)
from polyfan import Cone, orbit_basis, primitive
from quadrature import QuadResult, integrate_box, monte_carlo_box, pairwise_sum, richardson
from superform import Superform, normal_order

log = logger.bind(module="analytic")

INF = float("inf")
TWO_PI_I = 2j * np.pi
OPERATORS = {"+", "-", "*", "/", "neg", "exp", "log", "polar", "pow"}


# ---------------------------------------------------------------------------
# Expressões
# ---------------------------------------------------------------------------

def _tokenize(text: str) -> Any:
    tokens = re.findall(r"\(|\)|[^\s()]+", text)
    if not tokens:
        raise NonAdmissibleChartError("empty chart expression")

    def read(position: int) -> tuple[Any, int]:
        token = tokens[position]
        if token == "(":
            items = []
            position += 1
            while position < len(tokens) and tokens[position] != ")":
                item, position = read(position)
                items.append(item)
            if position >= len(tokens):
                raise NonAdmissibleChartError(f"unbalanced parentheses in {text!r}")
            return items, position + 1
        if token == ")":
            raise NonAdmissibleChartError(f"unexpected ')' in {text!r}")
        return token, position + 1

    tree, end = read(0)
    if end != len(tokens):
        raise NonAdmissibleChartError(f"trailing tokens in {text!r}")
    return tree


def _as_tree(node: Any) -> Any:
    if isinstance(node, str) and node.strip().startswith("("):
        return _tokenize(node)
    return node


def _atom(node: Any, symbols: dict) -> sympy.Expr:
    if isinstance(node, bool):
        raise NonAdmissibleChartError(f"invalid atom {node!r}")
    if isinstance(node, (int, float)):
        return sympy.nsimplify(node) if isinstance(node, float) else sympy.Integer(node)
    if node == "pi":
        return sympy.pi
    if node == "I":
        return sympy.I
    if node in symbols:
        return symbols[node]
    try:
        return sympy.Rational(node)
    except (TypeError, ValueError):
        raise NonAdmissibleChartError(f"unknown name {node!r} in chart expression") from None


def _value(node: Any, symbols: dict) -> sympy.Expr:
    node = _as_tree(node)
    if not isinstance(node, list):
        return _atom(node, symbols)
    if not node or node[0] not in OPERATORS:
        raise NonAdmissibleChartError(f"unknown operator in {node!r}")
    op, args = node[0], [_value(a, symbols) for a in node[1:]]
    if op == "+":
        return sympy.Add(*args)
    if op == "*":
        return sympy.Mul(*args)
    if op == "-":
        return args[0] - sympy.Add(*args[1:]) if len(args) > 1 else -args[0]
    if op == "/":
        return args[0] / args[1]
    if op == "neg":
        return -args[0]
    if op == "exp":
        return sympy.exp(args[0])
    if op == "log":
        return sympy.log(args[0])
    if op == "polar":
        return args[0] * sympy.exp(sympy.I * args[1])
    return args[0] ** args[1]


def _log(node: Any, symbols: dict) -> sympy.Expr:
    """Logaritmo contínuo ao longo da árvore: polar, exp e produtos viram somas"""
    node = _as_tree(node)
    if isinstance(node, list) and node:
        op = node[0]
        if op == "exp":
            return _value(node[1], symbols)
        if op == "polar":
            return _log(node[1], symbols) + sympy.I * _value(node[2], symbols)
        if op == "*":
            return sympy.Add(*[_log(a, symbols) for a in node[1:]])
        if op == "/":
            return _log(node[1], symbols) - _log(node[2], symbols)
        if op == "neg":
            return _log(node[1], symbols) + sympy.I * sympy.pi
        if op == "pow":
            exponent = _value(node[2], symbols)
            if exponent.is_integer:
                return exponent * _log(node[1], symbols)
    value = _value(node, symbols)
    if value.is_number and value.is_real and value < 0:
        return sympy.log(-value) + sympy.I * sympy.pi
    return sympy.log(value)


def parse_chart_expression(node: Any, names: Sequence[str] = ()) -> sympy.Expr:
    """Árvore em notação prefixa (lista JSON ou S-expressão) -> expressão sympy"""
    return _value(node, {name: param_symbol(name) for name in names})


def param_symbol(name: str) -> sympy.Symbol:
    return sympy.Symbol(name, real=True)


# ---------------------------------------------------------------------------
# Cadeias parametrizadas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    name: str
    lo: float
    hi: float
    radial: bool = False
    periodic: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise NonAdmissibleChartError(f"parameter {self.name}: empty range [{self.lo}, {self.hi}]")
        if self.periodic and not math.isclose(self.hi - self.lo, 2 * math.pi, rel_tol=1e-12):
            raise NonAdmissibleChartError(f"periodic parameter {self.name} must run over a full circle")

    @property
    def symbol(self) -> sympy.Symbol:
        return param_symbol(self.name)

    @property
    def bounded(self) -> bool:
        return self.lo > -INF and self.hi < INF


@dataclass(frozen=True)
class ProductStructure:
    ray: tuple  # raio nas coordenadas correntes da cadeia
    radial: str
    angle: Optional[str]
    approach: str = "+inf"

    def __post_init__(self):
        if self.approach not in ("+inf", "-inf"):
            raise FaceMapUnavailableError(f"approach must be '+inf' or '-inf', got {self.approach!r}")


@dataclass(eq=False)
class Chart:
    params: tuple
    logs: tuple  # log χ^{e_j} como expressões sympy nos parâmetros
    orientation: int = 1
    multiplicity: Fraction = Fraction(1)
    products: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise NonAdmissibleChartError(f"chart {self.name}: orientation must be ±1")
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise NonAdmissibleChartError(f"chart {self.name}: repeated parameter names")
        for product in self.products:
            if product.radial not in names or (product.angle is not None and product.angle not in names):
                raise FaceMapUnavailableError(f"chart {self.name}: product structure names unknown parameters")

    @classmethod
    def from_trees(cls, params: Sequence[Param], trees: Sequence[Any], **kwargs) -> "Chart":
        symbols = {p.name: p.symbol for p in params}
        logs = tuple(_log(tree, symbols) for tree in trees)
        return cls(tuple(params), logs, **kwargs)

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def n(self) -> int:
        return len(self.logs)

    @property
    def symbols(self) -> tuple:
        return tuple(p.symbol for p in self.params)

    def param_index(self, name: str) -> int:
        return [p.name for p in self.params].index(name)

    def product_for(self, ray: Sequence[int]) -> Optional[ProductStructure]:
        for product in self.products:
            if tuple(product.ray) == tuple(ray):
                return product
        return None

    @cached_property
    def _log_functions(self) -> list:
        return [sympy.lambdify(self.symbols, expr, modules="numpy") for expr in self.logs]

    @cached_property
    def _jacobian_functions(self) -> list:
        return [[sympy.lambdify(self.symbols, sympy.diff(expr, s), modules="numpy") for s in self.symbols]
                for expr in self.logs]

    def log_values(self, points: np.ndarray) -> np.ndarray:
        """L (N, n) nos parâmetros (N, r)"""
        points = np.atleast_2d(points)
        columns = [points[:, k] for k in range(self.dim)]
        with np.errstate(all="ignore"):
            values = [np.broadcast_to(np.asarray(f(*columns), dtype=complex), (points.shape[0],))
                      for f in self._log_functions]
        return np.stack(values, axis=1) if values else np.zeros((points.shape[0], 0), dtype=complex)

    def log_jacobian(self, points: np.ndarray) -> np.ndarray:
        """∂L_j/∂u_k (N, n, r)"""
        points = np.atleast_2d(points)
        columns = [points[:, k] for k in range(self.dim)]
        out = np.zeros((points.shape[0], self.n, self.dim), dtype=complex)
        with np.errstate(all="ignore"):
            for j, row in enumerate(self._jacobian_functions):
                for k, f in enumerate(row):
                    out[:, j, k] = np.broadcast_to(np.asarray(f(*columns), dtype=complex), (points.shape[0],))
        return out

    def describe(self) -> dict:
        return {
            "name": self.name,
            "params": [{"name": p.name, "lo": p.lo, "hi": p.hi, "radial": p.radial, "periodic": p.periodic}
                       for p in self.params],
            "logs": [str(expr) for expr in self.logs],
            "orientation": self.orientation,
            "multiplicity": str(self.multiplicity),
        }


@dataclass
class ParamChain:
    n: int
    charts: list
    boundary: list = field(default_factory=list)
    coords_basis: Optional[tuple] = None  # linhas em M: coordenadas correntes χ^{m_j}
    name: str = ""

    def __post_init__(self):
        if self.coords_basis is None:
            self.coords_basis = tuple(tuple(int(i == j) for j in range(self.n)) for i in range(self.n))
        dims = {c.dim for c in self.charts}
        if len(dims) > 1:
            raise DegreeError(f"chain {self.name}: charts of different dimensions {sorted(dims)}")
        for chart in self.charts + self.boundary:
            if chart.n != len(self.coords_basis):
                raise ChartMismatchError(f"chart {chart.name} has {chart.n} coordinates, "
                                         f"expected {len(self.coords_basis)}")

    @property
    def dim(self) -> int:
        return self.charts[0].dim if self.charts else 0

    @property
    def k(self) -> int:
        return len(self.coords_basis)

    @property
    def is_toric(self) -> bool:
        return self.k == self.n

    def is_closed(self) -> bool:
        return not self.boundary and all(p.periodic for c in self.charts for p in c.params)

    def ray_in_coordinates(self, ray: Sequence[int]) -> tuple:
        image = [sum(m[i] * ray[i] for i in range(self.n)) for m in self.coords_basis]
        return primitive(image) if any(image) else tuple(image)

    def describe(self) -> dict:
        return {
            "name": self.name, "n": self.n, "dim": self.dim,
            "coords_basis": [list(m) for m in self.coords_basis],
            "charts": [c.describe() for c in self.charts],
        }


def _finite_grid(chart: Chart, per_axis: int = 5) -> np.ndarray:
    axes = []
    for p in chart.params:
        lo = p.lo if p.lo > -INF else (p.hi - 10.0 if p.hi < INF else -10.0)
        hi = p.hi if p.hi < INF else lo + 10.0
        axes.append(np.linspace(lo, hi, per_axis))
    if not axes:
        return np.zeros((1, 0))
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def check_admissible(chain: ParamChain) -> None:
    """Direções não compactas anotadas como produto com ângulo completo; caixa longe de 0 e ∞"""
    for chart in chain.charts:
        for p in chart.params:
            if p.bounded:
                continue
            if not p.radial:
                raise NonAdmissibleChartError(f"chart {chart.name}: unbounded parameter {p.name} is not radial")
            ends = ({"+inf"} if p.hi == INF else set()) | ({"-inf"} if p.lo == -INF else set())
            for end in ends:
                annotated = [s for s in chart.products if s.radial == p.name and s.approach == end]
                if not annotated:
                    raise NonAdmissibleChartError(
                        f"chart {chart.name}: {p.name} → {end} has no declared product structure")
                for s in annotated:
                    if s.angle is None or not chart.params[chart.param_index(s.angle)].periodic:
                        raise NonAdmissibleChartError(
                            f"chart {chart.name}: product structure along {p.name} needs a full angle")
        values = chart.log_values(_finite_grid(chart))
        if not np.all(np.isfinite(values.real)):
            raise NonAdmissibleChartError(f"chart {chart.name}: map meets a zero or infinite coordinate")
    log.debug("chain {} admissible ({} charts)", chain.name, len(chain.charts))


# ---------------------------------------------------------------------------
# Pullback -ε log|·|*
# ---------------------------------------------------------------------------

def _pullback_values(omega: Superform, eps: float, log_values: np.ndarray, dlog: np.ndarray) -> np.ndarray:
    """Σ α(x) det[-(ε/2) d conj L_J ; -(1/2πi) d L_I] com x = -ε Re L"""
    x = -eps * log_values.real
    chart = omega.charts[None]
    inside = chart.contains(x)
    total = np.zeros(x.shape[0], dtype=complex)
    r = omega.p + omega.q
    for term in omega.chart_terms(None):
        coef = term.coef.evaluate(x)
        active = coef != 0
        if not np.any(active):
            continue
        if not np.all(inside[active]):
            raise OutsideNeighborhoodError(f"-ε log|z| leaves the declared neighborhood at ε={eps}")
        if r == 0:
            total += coef
            continue
        rows = [-(eps / 2.0) * np.conj(dlog[:, j, :]) for j in term.J]
        rows += [-dlog[:, i, :] / TWO_PI_I for i in term.I]
        total += coef * np.linalg.det(np.stack(rows, axis=1))
    return total


def pullback_eval(omega: Superform, eps: float, z: Sequence[complex], frame: Sequence[Sequence[complex]]) -> complex:
    """Valor de -ε log|·|*(ω) em z sobre o referencial tangente (vetores dz)"""
    if eps <= 0:
        raise ValueError("eps must be positive")
    z = np.asarray(z, dtype=complex)
    frame = np.asarray(frame, dtype=complex).reshape(-1, z.size)
    if frame.shape[0] != omega.p + omega.q:
        raise DegreeError(f"frame of {frame.shape[0]} vectors for a form of total degree {omega.p + omega.q}")
    if z.size != omega.n or np.any(z == 0):
        raise OutsideNeighborhoodError("z must be a point of (C*)^n")
    dlog = (frame / z).T[np.newaxis, :, :]
    return complex(_pullback_values(omega, eps, np.log(z)[np.newaxis, :], dlog)[0])


def _radial_box(chart: Chart, eps: float, cfg: QuadratureCfg) -> tuple[list, list, list, list]:
    lo, hi, splits, cut = [], [], [], []
    for p in chart.params:
        if p.radial:
            a = p.lo * eps if p.lo > -INF else -cfg.radial_cutoff
            b = p.hi * eps if p.hi < INF else cfg.radial_cutoff
            if p.lo > -INF and p.hi == INF:
                b = max(b, a + cfg.radial_cutoff)
            if p.hi < INF and p.lo == -INF:
                a = min(a, b - cfg.radial_cutoff)
            splits.append(max(1, min(512, int(math.ceil((b - a) / 0.5)))))
            cut.append((p.lo == -INF, p.hi == INF))
        else:
            a, b = p.lo, p.hi
            splits.append(1)
            cut.append((False, False))
        lo.append(a)
        hi.append(b)
    return lo, hi, splits, cut


def _chart_integrand(chart: Chart, omega: Superform, eps: float, cfg: QuadratureCfg):
    scale = np.array([1.0 / eps if p.radial else 1.0 for p in chart.params])
    jacobian = float(np.prod(scale)) if chart.dim else 1.0

    def integrand(u: np.ndarray) -> np.ndarray:
        s = u * scale
        values = _pullback_values(omega, eps, chart.log_values(s), chart.log_jacobian(s)) * jacobian
        if values.size and np.max(np.abs(values)) > cfg.magnitude_budget:
            raise DivergentIntegralError(
                f"integrand magnitude exceeds {cfg.magnitude_budget:.1e} on chart {chart.name}")
        return values

    return integrand


def _exit_guard(integrand, lo: list, hi: list, cut: list, chart: Chart, cfg: QuadratureCfg) -> None:
    # o integrando deve anular-se nas faces de truncamento radial
    rng = np.random.default_rng(cfg.seed)
    for k, (low_cut, high_cut) in enumerate(cut):
        for flag, value in ((low_cut, lo[k]), (high_cut, hi[k])):
            if not flag:
                continue
            points = np.array(lo) + (np.array(hi) - np.array(lo)) * rng.random((64, len(lo)))
            points[:, k] = value
            if np.max(np.abs(integrand(points))) > cfg.abs_tol:
                raise DivergentIntegralError(
                    f"form is not compactly supported along {chart.params[k].name} on chart {chart.name}")


def _check_pairing(chain: ParamChain, omega: Superform) -> None:
    if not chain.is_toric or chain.n != omega.n:
        raise ChartMismatchError("the chain must live in the torus of the form's open chart")
    if chain.dim != omega.p + omega.q:
        raise DegreeError(f"chain of dimension {chain.dim} paired with a ({omega.p},{omega.q})-form")


def _eps_chart(chart: Chart, omega: Superform, eps: float, cfg: QuadratureCfg) -> QuadResult:
    lo, hi, splits, cut = _radial_box(chart, eps, cfg)
    integrand = _chart_integrand(chart, omega, eps, cfg)
    _exit_guard(integrand, lo, hi, cut, chart, cfg)
    if cfg.rule == "montecarlo":
        result = monte_carlo_box(integrand, lo, hi, cfg.mc_samples, cfg.seed)
    else:
        result = integrate_box(integrand, lo, hi, cfg, splits)
    factor = chart.orientation * float(chart.multiplicity)
    return QuadResult(factor * result.value, abs(factor) * result.error, result.evaluations, result.boxes)


def eps_integral(chain: ParamChain, omega: Superform, eps: float, cfg: Optional[QuadratureCfg] = None,
                 threads: int = 1) -> QuadResult:
    """∫_V -ε log|·|*(ω), com parâmetros radiais em unidades tropicais u = ε s"""
    cfg = cfg or QuadratureCfg()
    if eps <= 0:
        raise ValueError("eps must be positive")
    _check_pairing(chain, omega)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(lambda chart: _eps_chart(chart, omega, eps, cfg), chain.charts))
    value = pairwise_sum(p.value for p in parts)
    return QuadResult(value, float(sum(p.error for p in parts)),
                      sum(p.evaluations for p in parts), sum(p.boxes for p in parts))


def monte_carlo_check(chain: ParamChain, omega: Superform, eps: float,
                      cfg: Optional[QuadratureCfg] = None) -> QuadResult:
    """Mesma integral por Monte Carlo com semente fixa (verificação cruzada)"""
    cfg = cfg or QuadratureCfg()
    mc = QuadratureCfg(**{**cfg.to_dict(), "rule": "montecarlo"})
    return eps_integral(chain, omega, eps, mc)


@dataclass
class LimitResult:
    value: complex
    error: float
    epsilons: list
    values: list
    errors: list
    estimated_order: Optional[float]
    slope: float

    def rows(self) -> list[tuple]:
        return [(e, v, err) for e, v, err in zip(self.epsilons, self.values, self.errors)]

    def to_dict(self) -> dict:
        return {
            "limit": [self.value.real, self.value.imag],
            "error": self.error,
            "levels": [{"eps": e, "value": [v.real, v.imag], "error": err} for e, v, err in self.rows()],
            "estimated_order": self.estimated_order,
            "slope": self.slope,
        }


def _diverging(values: list) -> bool:
    differences = [abs(b - a) for a, b in zip(values, values[1:])]
    growth = 0
    for a, b in zip(differences, differences[1:]):
        growth = growth + 1 if b > a * (1 + 1e-9) and b > 1e-12 else 0
        if growth >= 3:
            return True
    return False


def limit_integral(chain: ParamChain, omega: Superform, schedule: Optional[EpsSchedule] = None,
                   cfg: Optional[QuadratureCfg] = None, threads: int = 1) -> LimitResult:
    """lim_{ε→0} ∫_V -ε log|·|*(ω) por varredura em ε e Richardson"""
    schedule = schedule or EpsSchedule()
    cfg = cfg or QuadratureCfg()
    epsilons = schedule.epsilons()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        levels = list(pool.map(lambda eps: eps_integral(chain, omega, eps, cfg), epsilons))
    values = [level.value for level in levels]
    for eps, level in zip(epsilons, levels):
        log.debug("eps={:.4g} value={} error={:.2e}", eps, level.value, level.error)
    if _diverging(values):
        raise NonConvergenceError("successive ε-levels drift apart for three consecutive levels",
                                  estimate=values[-1], values=values)
    table = richardson(epsilons, values, schedule.order)
    error = max(table.error if len(values) > 1 else 0.0, max(level.error for level in levels))
    return LimitResult(table.best, error, epsilons, values, [level.error for level in levels],
                       table.estimated_order(), table.slope())


# ---------------------------------------------------------------------------
# Integrais logarítmicas
# ---------------------------------------------------------------------------

def _log_chart(chart: Chart, monomials: np.ndarray, cfg: QuadratureCfg) -> QuadResult:
    factor = chart.orientation * float(chart.multiplicity)
    if chart.dim == 0:
        return QuadResult(complex(factor), 0.0, 1, 1)
    lo, hi, splits = [], [], []
    for p in chart.params:
        a = p.lo if p.lo > -INF else -cfg.radial_cutoff
        b = p.hi if p.hi < INF else cfg.radial_cutoff
        if p.lo > -INF and p.hi == INF:
            b = max(b, a + cfg.radial_cutoff)
        if p.hi < INF and p.lo == -INF:
            a = min(a, b - cfg.radial_cutoff)
        lo.append(a)
        hi.append(b)
        splits.append(max(1, min(512, int(math.ceil((b - a) / 0.5)))) if p.radial else 1)

    def integrand(u: np.ndarray) -> np.ndarray:
        dlog = chart.log_jacobian(u)  # (N, n, r)
        rows = -np.einsum("ij,njk->nik", monomials, dlog) / TWO_PI_I
        values = np.linalg.det(rows)
        if values.size and np.max(np.abs(values)) > cfg.magnitude_budget:
            raise DivergentIntegralError(
                f"log-integrand magnitude exceeds {cfg.magnitude_budget:.1e} on chart {chart.name}")
        return values

    result = integrate_box(integrand, lo, hi, cfg, splits)
    return QuadResult(factor * result.value, abs(factor) * result.error, result.evaluations, result.boxes)


def log_integral(chain: ParamChain, monomials: Sequence[Sequence[int]], cfg: Optional[QuadratureCfg] = None,
                 threads: int = 1) -> QuadResult:
    """∫_V ∧_i -(1/2πi) d log χ^{m_i} com m_i nas coordenadas correntes da cadeia"""
    cfg = cfg or QuadratureCfg()
    monomials = np.array([list(m) for m in monomials], dtype=float).reshape(len(monomials), chain.k)
    if len(monomials) != chain.dim:
        raise DegreeError(f"{len(monomials)} monomials on a chain of dimension {chain.dim}")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(lambda chart: _log_chart(chart, monomials, cfg), chain.charts))
    return QuadResult(pairwise_sum(p.value for p in parts), float(sum(p.error for p in parts)),
                      sum(p.evaluations for p in parts), sum(p.boxes for p in parts))


@dataclass
class RationalityResult:
    value: complex
    error: float
    rational: Optional[Fraction]

    def to_dict(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "error": self.error,
            "rational": None if self.rational is None else str(self.rational),
        }


def rationality_check(chain: ParamChain, monomials: Sequence[Sequence[int]], cfg: Optional[QuadratureCfg] = None,
                      max_den: int = 100) -> RationalityResult:
    """Integral logarítmica sobre uma cadeia fechada e sua reconstrução racional"""
    if not chain.is_closed():
        raise NotClosedError(f"chain {chain.name} has a boundary")
    cfg = cfg or QuadratureCfg()
    result = log_integral(chain, monomials, cfg)
    tol = max(10.0 * result.error, 10.0 * cfg.abs_tol)
    value = complex(result.value)
    rational = None
    if abs(value.imag) <= tol:
        rational = rational_reconstruct(value.real, max_den, tol)
    return RationalityResult(value, result.error, rational)


# ---------------------------------------------------------------------------
# Mapas de face
# ---------------------------------------------------------------------------

def dual_unit(ray: Sequence[int]) -> list[int]:
    """m0 inteiro com <m0, l> = 1 (l primitivo)"""
    coeffs: list[int] = []
    g = 0
    for value in ray:
        if not coeffs:
            coeffs, g = [1], value
            if g < 0:
                coeffs, g = [-1], -g
            continue
        a, b, g = xgcd(g, value)
        coeffs = [a * c for c in coeffs] + [b]
    if g != 1:
        raise FaceMapUnavailableError(f"ray {list(ray)} is not primitive")
    return coeffs


def boundary_limit(expr: sympy.Expr, radial: sympy.Symbol, approach: str) -> sympy.Expr:
    """Valor de expr quando o parâmetro radial tende ao extremo indicado"""
    w = sympy.Symbol("w", positive=True)
    substituted = expr.subs(radial, -sympy.log(w) if approach == "+inf" else sympy.log(w))
    substituted = sympy.expand(substituted, power_exp=True, log=False, mul=False, multinomial=False)
    value = substituted.subs(w, 0)
    if value.has(sympy.nan, sympy.zoo, sympy.oo, -sympy.oo) or value.has(w):
        value = sympy.limit(substituted, w, 0, "+")
    return sympy.simplify(value)


def phase_winding(chart: Chart, product: ProductStructure, m0: Sequence[int], depth: float = 8.0) -> int:
    """Número de voltas da fase de χ^{m0} ao longo do ângulo da estrutura produto"""
    radial = chart.params[chart.param_index(product.radial)]
    angle_index = chart.param_index(product.angle)
    angle = chart.params[angle_index]
    if product.approach == "+inf":
        radial_value = (max(radial.lo, 0.0) if radial.lo > -INF else 0.0) + depth
    else:
        radial_value = (min(radial.hi, 0.0) if radial.hi < INF else 0.0) - depth
    base = []
    for p in chart.params:
        base.append(0.5 * (p.lo + p.hi) if p.bounded else (p.lo + 1.0 if p.lo > -INF else
                                                             (p.hi - 1.0 if p.hi < INF else 0.0)))
    base[chart.param_index(product.radial)] = radial_value
    samples = 256
    while samples <= 1 << 16:
        points = np.tile(base, (samples + 1, 1))
        points[:, angle_index] = np.linspace(angle.lo, angle.hi, samples + 1)
        phase = np.angle(np.exp(chart.log_values(points) @ np.asarray(m0, dtype=float)))
        unwrapped = np.unwrap(phase)
        if np.max(np.abs(np.diff(unwrapped))) < np.pi / 2:
            return int(round((unwrapped[-1] - unwrapped[0]) / (2 * np.pi)))
        samples *= 2
    raise FaceMapUnavailableError(f"chart {chart.name}: angle tracking did not resolve the winding")


def _face_chart(chart: Chart, product: ProductStructure, ray: tuple, basis: tuple) -> Chart:
    radial = param_symbol(product.radial)
    angle = param_symbol(product.angle)
    logs = []
    for m in basis:
        combined = sympy.Add(*[c * expr for c, expr in zip(m, chart.logs) if c])
        value = boundary_limit(combined, radial, product.approach)
        if value.has(sympy.oo, -sympy.oo, sympy.zoo, sympy.nan) or value.has(radial) or value.has(angle):
            raise FaceMapUnavailableError(
                f"chart {chart.name}: boundary value along {list(ray)} is not a product factor")
        logs.append(value)
    winding = phase_winding(chart, product, dual_unit(ray))
    if winding == 0:
        return None
    r_index = chart.param_index(product.radial)
    a_index = chart.param_index(product.angle)
    rest = [i for i in range(chart.dim) if i not in (r_index, a_index)]
    sign, _ = normal_order([r_index, a_index] + rest)
    orientation = chart.orientation * sign * (-1 if product.approach == "+inf" else 1)
    products = []
    for other in chart.products:
        if other.radial in (product.radial, product.angle) or other.angle in (product.radial, product.angle):
            continue
        image = [sum(m[i] * other.ray[i] for i in range(len(other.ray))) for m in basis]
        if any(image):
            products.append(ProductStructure(primitive(image), other.radial, other.angle, other.approach))
    return Chart(tuple(chart.params[i] for i in rest), tuple(logs), orientation,
                 chart.multiplicity * winding, tuple(products), f"{chart.name}/{list(ray)}")


def face_map(chain: ParamChain, ray: Sequence[int], cfg: Optional[QuadratureCfg] = None) -> ParamChain:
    """Cadeia de fronteira ∂_{O(l)} V nas coordenadas de M ∩ l^⊥"""
    ray = tuple(int(x) for x in ray)
    if not any(ray):
        raise FaceMapUnavailableError("face map along the zero vector")
    basis = orbit_basis(Cone.from_generators([ray], len(ray)), len(ray))
    charts = []
    for chart in chain.charts:
        product = chart.product_for(ray)
        if product is None:
            unbounded = [p.name for p in chart.params if not p.bounded and not any(
                s.radial == p.name for s in chart.products)]
            if unbounded:
                raise FaceMapUnavailableError(
                    f"chart {chart.name}: no product structure declared near {list(ray)}")
            continue
        if product.angle is None:
            raise FaceMapUnavailableError(f"chart {chart.name}: product structure without an angle")
        face = _face_chart(chart, product, ray, basis)
        if face is not None:
            charts.append(face)
    new_basis = tuple(
        tuple(sum(m[j] * row[i] for j, row in enumerate(chain.coords_basis)) for i in range(chain.n))
        for m in basis)
    log.debug("face map of {} along {}: {} charts", chain.name, list(ray), len(charts))
    return ParamChain(chain.n, charts, [], new_basis, f"{chain.name}/{list(ray)}")
