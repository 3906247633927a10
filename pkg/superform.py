"""
Módulo de Superformas

Este módulo gerencia superformas de Lagerberg em abertos de Trop(T_Σ),
incluindo:
- Perfis de coeficientes (polinômio × funções bump) por carta de órbita
- Operadores d', d'' e o produto cunha com os sinais da convenção adotada
- Verificação da condição de fronteira ao longo de π_{σ,τ}
- Integração sobre cadeias tropicais celulares (exata ou por quadratura)
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
import sympy
from loguru import logger
from scipy.optimize import linprog
from sympy import Matrix, Rational

from config import BoundaryCheckConfig, QuadratureCfg
from exact_linalg import WedgeIndex, to_rational
from exceptions import (
    ChartMismatchError,
    DegreeError,
    DivergentIntegralError,
    MissingChartError,
    OutsideNeighborhoodError,
)
from polyfan import Cone, Fan, cone_sort_key, orbit_image, orbit_projection
from quadrature import QuadResult, integrate_simplex_box, pairwise_sum
from tropcoh import Cell, TropChain

log = logger.bind(module="superform")

INF = float("inf")


def chart_symbols(k: int) -> tuple:
    return tuple(sympy.symbols(f"x1:{k + 1}", real=True)) if k else ()


def bump_expression(u) -> sympy.Expr:
    """b(u) = exp(-1/(1-u²)) para |u| < 1"""
    return sympy.exp(-1 / (1 - u ** 2))


@dataclass(frozen=True)
class Bump:
    coord: int  # índice 0-based da coordenada da carta
    center: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("bump radius must be positive")


@dataclass(frozen=True)
class CoefProfile:
    expr: sympy.Expr
    k: int
    support: tuple  # caixa aberta ((lo, hi), ...) fora da qual o coeficiente é 0

    @classmethod
    def from_parts(cls, k: int, poly: Sequence = ((1, None),), bumps: Sequence[Bump] = ()) -> "CoefProfile":
        x = chart_symbols(k)
        expr = sympy.Integer(0)
        for coeff, exponent in poly:
            exponent = exponent if exponent is not None else (0,) * k
            if len(exponent) != k:
                raise DegreeError(f"exponent {list(exponent)} does not match chart dimension {k}")
            term = to_rational(coeff)
            for xi, e in zip(x, exponent):
                term *= xi ** int(e)
            expr += term
        support = [(-INF, INF)] * k
        for b in bumps:
            if not 0 <= b.coord < k:
                raise DegreeError(f"bump coordinate {b.coord} outside chart of dimension {k}")
            center, radius = to_rational(b.center), to_rational(b.radius)
            expr *= bump_expression((x[b.coord] - center) / radius)
            lo, hi = support[b.coord]
            support[b.coord] = (max(lo, float(center - radius)), min(hi, float(center + radius)))
        return cls(expr, k, tuple(support))

    @classmethod
    def constant(cls, k: int, value=1) -> "CoefProfile":
        return cls(sympy.sympify(value), k, ((-INF, INF),) * k)

    @property
    def symbols(self) -> tuple:
        return chart_symbols(self.k)

    @property
    def is_polynomial(self) -> bool:
        return self.expr.is_polynomial(*self.symbols) if self.k else True

    @property
    def bounded(self) -> bool:
        return all(lo > -INF and hi < INF for lo, hi in self.support)

    def is_zero(self) -> bool:
        return sympy.simplify(sympy.expand(self.expr)) == 0

    def diff(self, i: int) -> "CoefProfile":
        return CoefProfile(sympy.diff(self.expr, self.symbols[i]), self.k, self.support)

    def __mul__(self, other: "CoefProfile") -> "CoefProfile":
        support = tuple((max(a[0], b[0]), min(a[1], b[1])) for a, b in zip(self.support, other.support))
        return CoefProfile(self.expr * other.expr, self.k, support)

    def scaled(self, factor) -> "CoefProfile":
        return CoefProfile(self.expr * factor, self.k, self.support)

    def inside(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        mask = np.ones(points.shape[0], dtype=bool)
        for i, (lo, hi) in enumerate(self.support):
            mask &= (points[:, i] > lo) & (points[:, i] < hi)
        return mask

    @cached_property
    def _numeric(self):
        return sympy.lambdify(self.symbols, self.expr, modules="numpy")

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Valores em pontos (N, k); zero fora do suporte"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values = np.zeros(points.shape[0], dtype=complex)
        mask = self.inside(points)
        if np.any(mask):
            with np.errstate(all="ignore"):
                inner = self._numeric(*[points[mask, i] for i in range(self.k)])
            values[mask] = np.broadcast_to(np.asarray(inner, dtype=complex), (int(mask.sum()),))
        return values

    def subs(self, mapping: dict) -> sympy.Expr:
        return self.expr.subs(mapping)


@dataclass(frozen=True)
class FormChart:
    sigma: Optional[Cone]  # None = órbita aberta N_R
    box: tuple  # vizinhança declarada nas coordenadas de N_σ

    @property
    def k(self) -> int:
        return len(self.box)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        mask = np.ones(points.shape[0], dtype=bool)
        for i, (lo, hi) in enumerate(self.box):
            mask &= (points[:, i] >= lo) & (points[:, i] <= hi)
        return mask


@dataclass(frozen=True)
class Term:
    sigma: Optional[Cone]
    I: tuple
    J: tuple
    coef: CoefProfile


def normal_order(indices: Sequence[int]) -> tuple[int, Optional[tuple]]:
    """Sinal da permutação que ordena os índices; (0, None) se houver repetição"""
    indices = list(indices)
    if len(set(indices)) != len(indices):
        return 0, None
    inversions = sum(1 for a in range(len(indices)) for b in range(a + 1, len(indices))
                     if indices[a] > indices[b])
    return (-1 if inversions % 2 else 1), tuple(sorted(indices))


def _key(sigma: Optional[Cone]):
    return () if sigma is None else (sigma.dim, sigma.rays)


@dataclass
class Superform:
    n: int
    p: int
    q: int
    charts: dict = field(default_factory=dict)  # σ -> FormChart
    terms: list = field(default_factory=list)

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise DegreeError("form degrees must be non-negative")
        if not self.charts:
            self.charts[None] = FormChart(None, ((-INF, INF),) * self.n)

    def chart_dim(self, sigma: Optional[Cone]) -> int:
        return self.n - (0 if sigma is None else sigma.dim)

    def add_term(self, sigma: Optional[Cone], I: Sequence[int], J: Sequence[int], coef: CoefProfile) -> None:
        if len(I) != self.p or len(J) != self.q:
            raise DegreeError(f"term of degree ({len(I)},{len(J)}) in a ({self.p},{self.q})-form")
        if sigma not in self.charts:
            raise MissingChartError(f"no chart declared for orbit {[] if sigma is None else sigma.rays}")
        k = self.chart_dim(sigma)
        if any(not 0 <= i < k for i in list(I) + list(J)):
            raise DegreeError(f"index out of range for a chart of dimension {k}")
        sign_i, I = normal_order(I)
        sign_j, J = normal_order(J)
        if sign_i == 0 or sign_j == 0:
            return
        coef = coef.scaled(sign_i * sign_j)
        for position, term in enumerate(self.terms):
            if (term.sigma, term.I, term.J, term.coef.support) == (sigma, I, J, coef.support):
                merged = CoefProfile(term.coef.expr + coef.expr, k, coef.support)
                if merged.is_zero():
                    self.terms.pop(position)
                else:
                    self.terms[position] = Term(sigma, I, J, merged)
                return
        if not coef.is_zero():
            self.terms.append(Term(sigma, I, J, coef))

    def chart_terms(self, sigma: Optional[Cone]) -> list[Term]:
        return [t for t in self.terms if t.sigma == sigma]

    def empty_like(self, p: int, q: int) -> "Superform":
        return Superform(self.n, p, q, dict(self.charts))

    def is_zero(self) -> bool:
        groups: dict = {}
        for t in self.terms:
            key = (_key(t.sigma), t.I, t.J)
            groups[key] = groups.get(key, 0) + t.coef.expr
        return all(sympy.simplify(sympy.expand(e)) == 0 for e in groups.values())

    def __add__(self, other: "Superform") -> "Superform":
        _check_family(self, other)
        if (self.p, self.q) != (other.p, other.q):
            raise DegreeError("cannot add forms of different degrees")
        result = self.empty_like(self.p, self.q)
        for t in self.terms + other.terms:
            result.add_term(t.sigma, t.I, t.J, t.coef)
        return result

    def __neg__(self) -> "Superform":
        result = self.empty_like(self.p, self.q)
        for t in self.terms:
            result.add_term(t.sigma, t.I, t.J, t.coef.scaled(-1))
        return result

    def __sub__(self, other: "Superform") -> "Superform":
        return self + (-other)

    def describe(self) -> dict:
        return {
            "n": self.n, "p": self.p, "q": self.q,
            "terms": [
                {"sigma": [] if t.sigma is None else [list(r) for r in t.sigma.rays],
                 "I": list(t.I), "J": list(t.J), "coef": str(t.coef.expr)}
                for t in sorted(self.terms, key=lambda t: (_key(t.sigma), t.I, t.J, str(t.coef.expr)))
            ],
        }


def _check_family(a: Superform, b: Superform) -> None:
    if a.n != b.n or set(map(_key, a.charts)) != set(map(_key, b.charts)):
        raise ChartMismatchError("forms are declared on different chart families")


def d_double_prime(omega: Superform) -> Superform:
    """d''(α d'x_I ⊗ d''x_J) = Σ ∂α/∂x_i d'x_I ⊗ d''x_i ∧ d''x_J"""
    result = omega.empty_like(omega.p, omega.q + 1)
    for t in omega.terms:
        for i in range(omega.chart_dim(t.sigma)):
            if i in t.J:
                continue
            result.add_term(t.sigma, t.I, (i,) + t.J, t.coef.diff(i))
    return result


def d_prime(omega: Superform) -> Superform:
    """d' = (-1)^q d ⊗ id"""
    sign = -1 if omega.q % 2 else 1
    result = omega.empty_like(omega.p + 1, omega.q)
    for t in omega.terms:
        for i in range(omega.chart_dim(t.sigma)):
            if i in t.I:
                continue
            result.add_term(t.sigma, (i,) + t.I, t.J, t.coef.diff(i).scaled(sign))
    return result


def wedge(alpha: Superform, beta: Superform) -> Superform:
    """(α ∧ β) = (-1)^{p q'} α_{I,J} β_{I',J'} d'x_I ∧ d'x_{I'} ⊗ d''x_J ∧ d''x_{J'}"""
    _check_family(alpha, beta)
    sign = -1 if (alpha.p * beta.q) % 2 else 1
    result = alpha.empty_like(alpha.p + beta.p, alpha.q + beta.q)
    for a in alpha.terms:
        for b in beta.terms:
            if a.sigma != b.sigma:
                continue
            result.add_term(a.sigma, a.I + b.I, a.J + b.J, (a.coef * b.coef).scaled(sign))
    return result


def function_form(n: int, coef: CoefProfile, I: Sequence[int] = (), J: Sequence[int] = ()) -> Superform:
    """Forma com um único termo na carta aberta"""
    omega = Superform(n, len(I), len(J))
    omega.add_term(None, I, J, coef)
    return omega


# ---------------------------------------------------------------------------
# Condição de fronteira
# ---------------------------------------------------------------------------

@dataclass
class BoundaryVerdict:
    passed: bool
    sigma: Optional[Cone] = None
    tau: Optional[Cone] = None
    witness: Optional[tuple] = None
    mode: str = "symbolic"

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "sigma": None if self.sigma is None else [list(r) for r in self.sigma.rays],
            "tau": None if self.tau is None else [list(r) for r in self.tau.rays],
            "witness": None if self.witness is None else [float(x) for x in self.witness],
            "mode": self.mode,
        }


def _minor(m: Matrix, rows: Sequence[int], cols: Sequence[int]):
    if not rows:
        return Rational(1)
    return m.extract(list(rows), list(cols)).det()


def _pullback_expressions(omega: Superform, sigma: Cone, tau_key: Optional[Cone], projection: Matrix,
                          x: tuple) -> dict:
    """Coeficientes de π*_{σ,τ}(α_σ) nas coordenadas x da carta τ"""
    y_values = list(projection * Matrix(list(x))) if projection.rows else []
    k_tau = len(x)
    result: dict = {}
    for t in omega.chart_terms(sigma):
        y_symbols = t.coef.symbols
        expr = t.coef.subs(dict(zip(y_symbols, y_values)))
        for I in combinations(range(k_tau), omega.p):
            a = _minor(projection, t.I, I)
            if a == 0:
                continue
            for J in combinations(range(k_tau), omega.q):
                b = _minor(projection, t.J, J)
                if b != 0:
                    result[(I, J)] = result.get((I, J), 0) + a * b * expr
    return result


def _reaches(chart: FormChart, direction: Sequence[float]) -> bool:
    for (lo, hi), v in zip(chart.box, direction):
        if v > 0 and hi < INF:
            return False
        if v < 0 and lo > -INF:
            return False
    return True


def boundary_condition_check(omega: Superform, fan: Fan, cfg: Optional[BoundaryCheckConfig] = None,
                             seed: int = 0) -> BoundaryVerdict:
    """Confere α_τ = π*_{σ,τ}(α_σ) perto da órbita σ para cada par de cartas τ ⊊ σ"""
    cfg = cfg or BoundaryCheckConfig()
    sigma_fan = fan.ambient if fan.ambient is not None else fan
    n = omega.n
    rng = np.random.default_rng(seed)
    for tau_key in sorted(omega.charts, key=lambda c: _key(c)):
        tau = tau_key if tau_key is not None else Cone.zero(n)
        tau_chart = omega.charts[tau_key]
        k_tau = tau_chart.k
        for sigma in sigma_fan.cones:
            if sigma == tau or not sigma.has_face(tau):
                continue
            sigma_bar = orbit_image(sigma, tau_key, n)
            direction = [sum(float(r[i]) for r in sigma_bar.rays) for i in range(k_tau)]
            if not _reaches(tau_chart, direction):
                continue
            projection = orbit_projection(sigma, tau)
            x = chart_symbols(k_tau)
            declared = sigma in omega.charts
            pulled = _pullback_expressions(omega, sigma, tau_key, projection, x) if declared else {}
            own: dict = {}
            for t in omega.chart_terms(tau_key):
                own.setdefault((t.I, t.J), []).append(t.coef)
            keys = set(own) | set(pulled)
            unbounded = all(c.support == ((-INF, INF),) * k_tau for cs in own.values() for c in cs)
            if declared and unbounded and all(
                    c.support == ((-INF, INF),) * c.k for t in omega.chart_terms(sigma) for c in [t.coef]):
                for key in sorted(keys):
                    difference = sum((c.expr for c in own.get(key, [])), sympy.Integer(0)) - pulled.get(key, 0)
                    if sympy.simplify(sympy.expand(difference)) != 0:
                        witness = _collar_points(tau_chart, sigma_bar, projection, cfg, rng, 1)[0]
                        return BoundaryVerdict(False, sigma, tau_key, tuple(witness), "symbolic")
                continue
            points = _collar_points(tau_chart, sigma_bar, projection, cfg, rng, cfg.samples)
            sigma_chart = omega.charts.get(sigma)
            for key in sorted(keys):
                mine = sum((c.evaluate(points) for c in own.get(key, [])), np.zeros(len(points), dtype=complex))
                if not declared:
                    if np.any(np.abs(mine) > cfg.tol):
                        raise MissingChartError(
                            f"form reaches orbit {list(sigma.rays)} without a declared chart")
                    continue
                theirs = _evaluate_pullback(omega, sigma, projection, key, points, sigma_chart)
                bad = np.nonzero(np.abs(mine - theirs) > cfg.tol)[0]
                if bad.size:
                    return BoundaryVerdict(False, sigma, tau_key, tuple(points[bad[0]]), "numeric")
    return BoundaryVerdict(True, mode="numeric" if omega.terms else "symbolic")


def _collar_points(chart: FormChart, sigma_bar: Cone, projection: Matrix, cfg: BoundaryCheckConfig,
                   rng: np.random.Generator, count: int) -> np.ndarray:
    # x = L(y) + Σ t_k v̄_k, com L inversa à direita de Π e t_k ∈ [collar, collar + width]
    k = chart.k
    pi = np.array(projection.tolist(), dtype=float).reshape(projection.rows, k)
    right_inverse = pi.T @ np.linalg.inv(pi @ pi.T) if pi.shape[0] else np.zeros((k, 0))
    rays = np.array(sigma_bar.rays, dtype=float).reshape(-1, k)
    lo = np.array([max(a, -cfg.width) for a, _ in chart.box])
    hi = np.array([min(b, cfg.width) for _, b in chart.box])
    base = lo + (hi - lo) * rng.random((count, k))
    y = base @ pi.T if pi.shape[0] else np.zeros((count, 0))
    t = cfg.collar + cfg.width * rng.random((count, rays.shape[0]))
    return y @ right_inverse.T + t @ rays


def _evaluate_pullback(omega: Superform, sigma: Cone, projection: Matrix, key: tuple, points: np.ndarray,
                       sigma_chart: FormChart) -> np.ndarray:
    I, J = key
    pi = np.array(projection.tolist(), dtype=float).reshape(projection.rows, points.shape[1])
    y = points @ pi.T if pi.shape[0] else np.zeros((points.shape[0], 0))
    if pi.shape[0] and not np.all(sigma_chart.contains(y)):
        raise OutsideNeighborhoodError(f"collar points leave the declared chart of {list(sigma.rays)}")
    total = np.zeros(points.shape[0], dtype=complex)
    for t in omega.chart_terms(sigma):
        a = _minor(projection, t.I, I)
        b = _minor(projection, t.J, J)
        if a == 0 or b == 0:
            continue
        total += float(a * b) * t.coef.evaluate(y)
    return total


# ---------------------------------------------------------------------------
# Integração
# ---------------------------------------------------------------------------

@dataclass
class IntegralResult:
    value: complex
    error: float = 0.0
    exact: bool = True

    def to_dict(self) -> dict:
        value = complex(self.value)
        return {"value": [value.real, value.imag], "error": self.error, "exact": self.exact}


def _exact_cell_integral(coef: CoefProfile, cell: Cell) -> Rational:
    a = len(cell.vertices) - 1
    s = sympy.symbols(f"s1:{a + 1}", real=True) if a else ()
    edges = cell.edge_matrix()
    origin = [to_rational(v) for v in cell.vertices[0]]
    point = [origin[i] + sum((edges[i, j] * s[j] for j in range(a)), Rational(0)) for i in range(cell.ambient_dim)]
    expr = sympy.expand(coef.subs(dict(zip(coef.symbols, point))))
    for j in reversed(range(a)):
        upper = 1 - sum(s[:j], Rational(0))
        expr = sympy.integrate(expr, (s[j], 0, upper))
    return sympy.nsimplify(expr) if not expr.is_Rational else expr


def _ray_bounds(coef: CoefProfile, cell: Cell) -> Optional[list[float]]:
    """Maior t_j com γ(s,t) no fecho do suporte; None se a célula não encontra o suporte"""
    a = len(cell.vertices) - 1
    b = len(cell.rays)
    edges = np.array(cell.edge_matrix().tolist(), dtype=float).reshape(cell.ambient_dim, a + b)
    origin = np.array([float(to_rational(v)) for v in cell.vertices[0]])
    rows, rhs = [], []
    for i, (lo, hi) in enumerate(coef.support):
        if hi < INF:
            rows.append(edges[i]), rhs.append(hi - origin[i])
        if lo > -INF:
            rows.append(-edges[i]), rhs.append(origin[i] - lo)
    if a:
        rows.append(np.concatenate([np.ones(a), np.zeros(b)])), rhs.append(1.0)
    bounds = [(0, None)] * (a + b)
    a_ub = np.array(rows) if rows else None
    b_ub = np.array(rhs) if rows else None
    limits = []
    for j in range(b):
        c = np.zeros(a + b)
        c[a + j] = -1.0
        result = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if result.status == 2:
            return None
        if result.status == 3:
            raise DivergentIntegralError(
                f"coefficient is not compactly supported along ray {list(cell.rays[j])}")
        limits.append(float(-result.fun))
    return limits


def _numeric_cell_integral(coef: CoefProfile, cell: Cell, cfg: QuadratureCfg) -> QuadResult:
    a = len(cell.vertices) - 1
    limits = _ray_bounds(coef, cell) if cell.rays else []
    if limits is None or any(t <= 0 for t in limits):
        return QuadResult(0j, 0.0)
    edges = np.array(cell.edge_matrix().tolist(), dtype=float).reshape(cell.ambient_dim, cell.dim)
    origin = np.array([float(to_rational(v)) for v in cell.vertices[0]])

    def integrand(params: np.ndarray) -> np.ndarray:
        return coef.evaluate(origin + params @ edges.T)

    return integrate_simplex_box(integrand, a, [0.0] * len(limits), limits, cfg)


def _term_contribution(term: Term, cell: Cell, coefficient: tuple, p: int,
                       cfg: QuadratureCfg) -> tuple[complex, float, bool]:
    k = cell.ambient_dim
    pairing = coefficient[WedgeIndex(k, p).position(term.I)]
    if pairing == 0:
        return 0, 0.0, True
    edges = cell.edge_matrix()
    jacobian = edges.extract(list(term.J), list(range(cell.dim))).det() if cell.dim else Rational(1)
    if jacobian == 0:
        return 0, 0.0, True
    if not cell.rays and term.coef.is_polynomial and cell.dim:
        value = _exact_cell_integral(term.coef, cell)
        return pairing * jacobian * value, 0.0, True
    if not cell.dim:
        value = term.coef.evaluate(np.array([[float(to_rational(v)) for v in cell.vertices[0]]]))[0]
        return complex(pairing) * float(jacobian) * value, 0.0, False
    result = _numeric_cell_integral(term.coef, cell, cfg)
    factor = complex(pairing) * float(jacobian)
    return factor * result.value, abs(factor) * result.error, False


def integrate(chain: TropChain, omega: Superform, cfg: Optional[QuadratureCfg] = None,
              threads: int = 1) -> IntegralResult:
    """Σ_células Σ_termos <dx_I, v> ∫_γ α_{I,J} dx_J"""
    cfg = cfg or QuadratureCfg()
    if chain.p != omega.p:
        raise DegreeError(f"a ({chain.p},·)-chain cannot be paired with a ({omega.p},{omega.q})-form")
    jobs = []
    for cell in sorted(chain.terms, key=lambda c: (_key(c.orbit), c.dim, c.vertices, c.rays)):
        if cell.dim != omega.q:
            raise DegreeError(f"cell of dimension {cell.dim} paired with a form of degree q={omega.q}")
        if cell.orbit not in omega.charts:
            raise MissingChartError(f"no chart for the orbit of cell {cell.describe()}")
        for term in omega.chart_terms(cell.orbit):
            jobs.append((term, cell, chain.terms[cell]))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(lambda job: _term_contribution(job[0], job[1], job[2], omega.p, cfg), jobs))
    if all(exact for _, _, exact in parts):
        value = sum((v for v, _, _ in parts), Rational(0))
        return IntegralResult(sympy.nsimplify(value), 0.0, True)
    value = pairwise_sum(complex(v) for v, _, _ in parts)
    error = float(sum(e for _, e, _ in parts))
    log.debug("integral over {} cells: {} (error {:.2e})", len(chain.terms), value, error)
    return IntegralResult(value, error, False)


def cone_order(cones: Sequence[Cone]) -> list[Cone]:
    return sorted(cones, key=cone_sort_key)
