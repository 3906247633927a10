"""
Módulo de Tropicalização Semialgébrica

Este módulo gerencia a parte positiva e as ferramentas de fase,
incluindo:
- Cones básicos exponenciais e o teste de pertinência
- Conjuntos semialgébricos em R^n_{>0} × R^m
- Amostragem do conjunto de limite logarítmico (aproximação, não certificado)
- Teste de encontro com órbitas pelos termos dominantes
- Fatias de fronteira com fase e o peso obtido pelo enrolamento de χ^m
- Verificação pontual de estruturas de leque declaradas
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import sympy
from loguru import logger
from scipy.optimize import least_squares

from analytic import (
    INF,
    Chart,
    ParamChain,
    ProductStructure,
    boundary_limit,
    dual_unit,
    log_integral,
    param_symbol,
    phase_winding,
)
from config import QuadratureCfg, SamplingConfig
from cycles import Polynomial
from exceptions import FaceMapUnavailableError, InvariantViolation, SamplingFailure
from polyfan import Cone, orbit_basis
from superform import normal_order

log = logger.bind(module="satrop")

RELATIONS = (">=", ">", "=")


# ---------------------------------------------------------------------------
# Cones básicos exponenciais
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpBasicCone:
    N: tuple
    h: float

    def __post_init__(self):
        if any(x <= 0 for x in self.N):
            raise InvariantViolation("exponents N_i must be positive", invariant="ExpBasicCone: N_i > 0")
        if self.h <= 0:
            raise InvariantViolation("h must be positive", invariant="ExpBasicCone: h > 0")

    @property
    def r(self) -> int:
        return len(self.N) + 1


def in_exp_cone(a: Sequence[float], cone: ExpBasicCone) -> bool:
    """a ∈ (0, h]^r e a_i ≤ a_{i+1}^{N_i}"""
    if len(a) != cone.r:
        raise InvariantViolation(f"point of length {len(a)} for a cone of dimension {cone.r}")
    if any(not 0 < x <= cone.h for x in a):
        return False
    return all(a[i] <= a[i + 1] ** cone.N[i] for i in range(cone.r - 1))


# ---------------------------------------------------------------------------
# Conjuntos semialgébricos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    poly: Polynomial
    relation: str = ">="

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise InvariantViolation(f"relation must be one of {RELATIONS}")
        if not self.poly.terms:
            raise InvariantViolation("constraint polynomial must be nonzero", invariant="SemialgSet")


def _term_scale(poly: Polynomial, x: np.ndarray) -> float:
    # escala relativa: soma dos valores absolutos dos termos
    total = sum(abs(float(coeff)) * float(np.prod(np.abs(x) ** np.array(e))) for coeff, e in poly.terms)
    return max(total, 1e-300)


@dataclass(frozen=True)
class SemialgSet:
    n: int  # coordenadas positivas
    m: int = 0  # coordenadas reais livres
    constraints: tuple = ()
    witness: Optional[tuple] = None

    def __post_init__(self):
        for c in self.constraints:
            if c.poly.n != self.n + self.m:
                raise InvariantViolation("constraint arity does not match the ambient space")

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """Violação escalada de cada restrição (zero dentro do conjunto)"""
        values = []
        for c in self.constraints:
            value = float(c.poly.evaluate(x).real[0])
            scale = _term_scale(c.poly, x)
            if c.relation == "=":
                values.append(value / scale)
            else:
                values.append(min(value, 0.0) / scale)
        return np.array(values)

    def contains(self, x: Sequence[float], tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if np.any(x[: self.n] <= 0):
            return False
        for c in self.constraints:
            value = float(c.poly.evaluate(x).real[0])
            scale = _term_scale(c.poly, x)
            if c.relation == "=" and abs(value) > tol * scale:
                return False
            if c.relation == ">=" and value < -tol * scale:
                return False
            if c.relation == ">" and value <= 0:
                return False
        return True


@dataclass
class Cluster:
    center: tuple
    count: int

    def to_dict(self) -> dict:
        return {"center": [float(x) for x in self.center], "count": self.count}


@dataclass
class DirectionCloud:
    vectors: np.ndarray
    weights: np.ndarray
    clusters: list = field(default_factory=list)
    certified: bool = False

    def __post_init__(self):
        if self.vectors.size and np.any(np.abs(np.linalg.norm(self.vectors, axis=1) - 1.0) > 1e-12):
            raise InvariantViolation("direction vectors must be unit-norm", invariant="DirectionCloud")

    def to_dict(self) -> dict:
        return {
            "samples": int(self.vectors.shape[0]),
            "clusters": [c.to_dict() for c in self.clusters],
            "certified": self.certified,
        }


def _cluster(vectors: np.ndarray, tol: float) -> list[Cluster]:
    centers: list[np.ndarray] = []
    sums: list[np.ndarray] = []
    counts: list[int] = []
    for v in vectors:
        for i, c in enumerate(centers):
            if np.arccos(np.clip(np.dot(c, v), -1.0, 1.0)) <= tol:
                sums[i] = sums[i] + v
                counts[i] += 1
                centers[i] = sums[i] / np.linalg.norm(sums[i])
                break
        else:
            centers.append(v.copy())
            sums.append(v.copy())
            counts.append(1)
    order = sorted(range(len(centers)), key=lambda i: (-counts[i], tuple(np.round(centers[i], 9))))
    return [Cluster(tuple(centers[i]), counts[i]) for i in order]


def _sample_radius(s: SemialgSet, radius: float, samples: int, seed: np.random.SeedSequence,
                   cfg: SamplingConfig) -> tuple[list, bool]:
    rng = np.random.default_rng(seed)
    found, accepted = False, []
    dim = s.n + s.m
    for _ in range(samples * cfg.max_attempts):
        if len(accepted) >= samples:
            break
        direction = rng.normal(size=s.n)
        direction /= np.linalg.norm(direction)
        start = np.concatenate([radius * direction, rng.normal(size=s.m)])

        def point(y: np.ndarray) -> np.ndarray:
            return np.concatenate([np.exp(-y[: s.n]), y[s.n:]])

        y = start
        for _ in range(3):
            if s.constraints:
                y = least_squares(lambda v: s.residuals(point(v)), y, method="trf",
                                  xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=200 * dim).x
            x = point(y)
            if not np.all(np.isfinite(x)) or not s.contains(x, cfg.residual_tol):
                break
            found = True
            norm = float(np.linalg.norm(y[: s.n]))
            if norm >= radius * (1 - 1e-9):
                accepted.append(y[: s.n] / norm)
                break
            if norm < 1e-9:
                break
            # afasta o ponto projetado ao longo da própria direção
            y = np.concatenate([y[: s.n] * (1.5 * radius / norm), y[s.n:]])
    return accepted, found


def log_limit_sample(s: SemialgSet, radii: Sequence[float], samples: Optional[int] = None,
                     seed: Optional[int] = None, cfg: Optional[SamplingConfig] = None,
                     threads: int = 1) -> DirectionCloud:
    """Direções de -log x para amostras de S com ‖-log x‖ ≥ raio"""
    cfg = cfg or SamplingConfig()
    samples = samples or cfg.samples
    seed = cfg.seed if seed is None else seed
    if any(r <= 0 for r in radii):
        raise InvariantViolation("radii must be positive")
    streams = np.random.SeedSequence(seed).spawn(len(radii))
    per_radius = max(1, samples // max(1, len(radii)))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(lambda job: _sample_radius(s, job[0], per_radius, job[1], cfg),
                              zip(radii, streams)))
    if not any(found for _, found in parts) and s.witness is None:
        raise SamplingFailure(f"no point of the set found after {samples * cfg.max_attempts} attempts per radius")
    vectors = [v for accepted, _ in parts for v in accepted]
    vectors.sort(key=lambda v: tuple(v))
    array = np.array(vectors).reshape(-1, s.n)
    if array.size:
        array = array / np.linalg.norm(array, axis=1)[:, np.newaxis]
    cloud = DirectionCloud(array, np.ones(array.shape[0]), _cluster(array, cfg.cluster_tol))
    log.debug("log-limit sampling: {} directions in {} clusters", array.shape[0], len(cloud.clusters))
    return cloud


def orbit_meets(s: SemialgSet, w: Sequence[float], cfg: Optional[SamplingConfig] = None) -> str:
    """meets-fully, empty ou indeterminate pelo sinal dos coeficientes ⟨e, w⟩-mínimos"""
    cfg = cfg or SamplingConfig()
    direction = [Fraction(x).limit_denominator(cfg.denominator_bound) for x in w]
    verdict = "meets-fully"
    for c in s.constraints:
        if c.relation != ">=":
            return "indeterminate"
        pairings = [(sum(Fraction(e[i]) * direction[i] for i in range(s.n)), coeff) for coeff, e in c.poly.terms]
        lowest = min(p for p, _ in pairings)
        minimal = [coeff for p, coeff in pairings if p == lowest]
        if len(minimal) > 1:
            return "indeterminate"
        if minimal[0] < 0:
            verdict = "empty"
    return verdict


def positive_part_point(z: Sequence[complex]) -> tuple:
    """Coordenadas tropicais -log|z_i| com +∞ nas coordenadas nulas"""
    return tuple(INF if abs(complex(x)) == 0 else float(-np.log(abs(complex(x)))) for x in z)


# ---------------------------------------------------------------------------
# Fatias de fronteira com fase
# ---------------------------------------------------------------------------

def phase_boundary_slice(chain: ParamChain, ray: Sequence[int]) -> ParamChain:
    """Fatia (O(l)(R>0) × fase) perto do raio l; o parâmetro radial fica congelado no limite"""
    ray = tuple(int(x) for x in ray)
    basis = orbit_basis(Cone.from_generators([ray], len(ray)), len(ray))
    m0 = dual_unit(ray)
    charts = []
    for chart in chain.charts:
        product = chart.product_for(ray)
        if product is None:
            if any(not p.bounded for p in chart.params):
                raise FaceMapUnavailableError(f"chart {chart.name}: no product structure near {list(ray)}")
            continue
        if product.angle is None:
            raise FaceMapUnavailableError(f"chart {chart.name}: product structure without an angle")
        charts.append(_slice_chart(chart, product, ray, basis, m0))
    coords = tuple(
        tuple(sum(m[j] * row[i] for j, row in enumerate(chain.coords_basis)) for i in range(chain.n))
        for m in list(basis) + [m0])
    return ParamChain(chain.n, charts, [], coords, f"{chain.name}/slice{list(ray)}")


def _slice_chart(chart: Chart, product: ProductStructure, ray: tuple, basis: tuple, m0: list) -> Chart:
    radial = param_symbol(product.radial)
    angle = param_symbol(product.angle)
    logs = []
    for m in basis:
        combined = sympy.Add(*[c * expr for c, expr in zip(m, chart.logs) if c])
        value = boundary_limit(combined, radial, product.approach)
        if value.has(sympy.oo, -sympy.oo, sympy.zoo, sympy.nan) or value.has(radial) or value.has(angle):
            raise FaceMapUnavailableError(f"chart {chart.name}: boundary factor along {list(ray)} is not a product")
        logs.append(value)
    winding = phase_winding(chart, product, m0)
    logs.append(sympy.I * winding * angle)
    r_index = chart.param_index(product.radial)
    a_index = chart.param_index(product.angle)
    rest = [i for i in range(chart.dim) if i not in (r_index, a_index)]
    sign, _ = normal_order([r_index, a_index] + rest)
    # orientação oposta à do mapa de face: a fase entra primeiro
    orientation = chart.orientation * sign * (1 if product.approach == "+inf" else -1)
    return Chart((chart.params[a_index],) + tuple(chart.params[i] for i in rest), tuple(logs), orientation,
                 chart.multiplicity, (), f"{chart.name}/slice{list(ray)}")


def slice_weight(slice_chain: ParamChain, monomials: Sequence[Sequence[int]] = (),
                 cfg: Optional[QuadratureCfg] = None) -> complex:
    """Peso pela fase: ∫ -(1/2πi) d log(fase) ∧ d log χ^{m} sobre a fatia"""
    k = slice_chain.k
    phase = [0] * (k - 1) + [1]
    full = [phase] + [list(m) + [0] for m in monomials]
    return complex(log_integral(slice_chain, full, cfg).value)


@dataclass
class SpotCheckVerdict:
    passed: bool
    ray: Optional[tuple] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"passed": self.passed, "ray": None if self.ray is None else list(self.ray), "detail": self.detail}


def spot_check_fan_structure(chain: ParamChain, rays: Sequence[Sequence[int]], depths: tuple = (8.0, 16.0),
                             tol: float = 1e-3, seed: int = 0) -> SpotCheckVerdict:
    """Compara fatias em duas profundidades; uma falha refuta a estrutura declarada"""
    rng = np.random.default_rng(seed)
    for ray in rays:
        ray = tuple(int(x) for x in ray)
        basis = np.array(orbit_basis(Cone.from_generators([ray], len(ray)), len(ray)), dtype=float)
        m0 = dual_unit(ray)
        for chart in chain.charts:
            product = chart.product_for(ray)
            if product is None:
                continue
            r_index = chart.param_index(product.radial)
            radial = chart.params[r_index]
            base = []
            for p in chart.params:
                lo = p.lo if p.lo > -INF else -1.0
                hi = p.hi if p.hi < INF else lo + 2.0
                base.append(lo + (hi - lo) * rng.random(16))
            points = np.stack(base, axis=1)
            if product.approach == "+inf":
                start, step = (max(radial.lo, 0.0) if radial.lo > -INF else 0.0), 1.0
            else:
                start, step = (min(radial.hi, 0.0) if radial.hi < INF else 0.0), -1.0
            slices = []
            for depth in depths:
                points[:, r_index] = start + step * depth
                values = chart.log_values(points)
                slices.append(np.exp(values @ basis.T) if basis.size else np.zeros((len(points), 0)))
            if len({phase_winding(chart, product, m0, depth) for depth in depths}) > 1:
                return SpotCheckVerdict(False, ray, f"phase winding changes with depth on chart {chart.name}")
            if slices[0].size and np.max(np.abs(slices[0] - slices[1])) > tol:
                return SpotCheckVerdict(False, ray, f"boundary slices differ on chart {chart.name}")
    return SpotCheckVerdict(True)
