"""
Módulo de Ciclos Tropicais Ponderados

Este módulo gerencia as tropicalizações com pesos,
incluindo:
- Polítopos de Newton e o leque normal (dualidade de Newton)
- Tropicalização de hipersuperfícies com multiplicidades (comprimento de rede das arestas)
- Verificação exata da condição de balanceamento
- A cadeia tropical Σ m_P 1_P ⊗ [P] e o pushforward por mapas monomiais
- wtTrop de cadeias parametrizadas por integrais logarítmicas sobre mapas de face
- Oráculo de amostragem -ε log|·| para conferir direções
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product
from math import gcd
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from scipy.spatial import ConvexHull, QhullError
from sympy import Matrix, Rational

import analytic
from config import QuadratureCfg
from exact_linalg import (
    Subspace,
    WedgeIndex,
    clear_denominators,
    integer_kernel_basis,
    kernel_basis,
    rank,
    to_matrix,
    wedge_coordinates,
)
from exceptions import DegreeError, InvariantViolation, UnbalancedCycleError
from polyfan import (
    Cone, Fan, Lattice, OrientedCone, arrangement_refinement, cone_sort_key, orientation_generator,
)
from tropcoh import Cell, TropChain, chain_boundary

log = logger.bind(module="cycles")


@dataclass(frozen=True)
class Polynomial:
    n: int
    terms: tuple  # ((coeficiente, expoente), ...) com coeficientes não nulos

    @classmethod
    def from_terms(cls, n: int, terms: Sequence) -> "Polynomial":
        merged: dict = {}
        for coeff, exponent in terms:
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != n:
                raise InvariantViolation(f"exponent {list(exponent)} has wrong length for n={n}",
                                         invariant="Polynomial: exponent length")
            merged[exponent] = merged.get(exponent, 0) + coeff
        return cls(n, tuple((c, e) for e, c in sorted(merged.items()) if c != 0))

    @property
    def exponents(self) -> list[tuple]:
        return [e for _, e in self.terms]

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        total = np.zeros(z.shape[0], dtype=complex)
        for coeff, exponent in self.terms:
            total += complex(coeff) * np.prod(z ** np.array(exponent), axis=1)
        return total


# ---------------------------------------------------------------------------
# Polítopo de Newton
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NewtonPolytope:
    points: tuple
    vertices: tuple
    direction: Subspace  # direção do fecho afim
    facets: tuple  # (normal interna inteira, pontos na faceta)
    edges: tuple  # (u, v, comprimento de rede)
    volume: Optional[float] = None  # volume normalizado (dim! · vol) quando de dimensão cheia

    @property
    def dim(self) -> int:
        return self.direction.dim


def _dot(a: Sequence, b: Sequence):
    return sum(Rational(x) * Rational(y) for x, y in zip(a, b))


def lattice_length(u: Sequence[int], v: Sequence[int]) -> int:
    """Número de pontos de rede no segmento [u,v] menos um"""
    g = 0
    for a, b in zip(u, v):
        g = gcd(g, abs(int(b) - int(a)))
    return g


def newton_polytope(points: Sequence[Sequence[int]]) -> NewtonPolytope:
    """Descrição exata (facetas, arestas) do fecho convexo dos expoentes"""
    pts = sorted({tuple(int(x) for x in p) for p in points})
    if not pts:
        raise InvariantViolation("empty support", invariant="NewtonPolytope: points")
    n = len(pts[0])
    origin = pts[0]
    differences = [[a - b for a, b in zip(p, origin)] for p in pts[1:]]
    direction = Subspace.span(differences, n)
    d = direction.dim
    if d == 0:
        return NewtonPolytope(tuple(pts), tuple(pts), direction, (), ())
    if d == 1:
        values = [_dot(direction.basis[0], p) for p in pts]
        low = pts[values.index(min(values))]
        high = pts[values.index(max(values))]
        edge = (low, high, lattice_length(low, high))
        return NewtonPolytope(tuple(pts), (low, high), direction, (), (edge,))

    basis = direction.matrix()
    facets = {}
    for chosen in combinations(pts, d):
        diffs = [[a - b for a, b in zip(p, chosen[0])] for p in chosen[1:]]
        if rank(to_matrix(diffs, n)) < d - 1:
            continue
        null = kernel_basis(to_matrix(diffs, n) * basis.T)
        if null.dim != 1:
            continue
        normal = list((Matrix([list(null.basis[0])]) * basis)[0, :])
        level = _dot(normal, chosen[0])
        values = [_dot(normal, p) - level for p in pts]
        if any(v < 0 for v in values) and any(v > 0 for v in values):
            continue
        if all(v <= 0 for v in values):
            normal = [-x for x in normal]
        on_facet = tuple(p for p, v in zip(pts, values) if v == 0)
        facets.setdefault(on_facet, clear_denominators(normal))
    facet_list = tuple((normal, on_facet) for on_facet, normal in sorted(facets.items()))

    def normals_through(*points_on):
        return [normal for normal, on_facet in facet_list if all(p in on_facet for p in points_on)]

    vertices = tuple(p for p in pts if rank(to_matrix(normals_through(p), n)) == d)
    edges = []
    for u, v in combinations(vertices, 2):
        normals = normals_through(u, v)
        if normals and rank(to_matrix(normals, n)) == d - 1:
            edges.append((u, v, lattice_length(u, v)))

    volume = None
    if d == n:
        try:
            hull = ConvexHull(np.array(pts, dtype=float))
            volume = float(hull.volume) * float(np.prod(np.arange(1, n + 1)))
        except QhullError:
            log.debug("qhull could not compute the volume of {}", pts)
    return NewtonPolytope(tuple(pts), vertices, direction, facet_list, tuple(edges), volume)


# ---------------------------------------------------------------------------
# Ciclos ponderados
# ---------------------------------------------------------------------------

@dataclass
class BalanceVerdict:
    balanced: bool
    witness: Optional[Cone] = None
    residual: Optional[tuple] = None

    def to_dict(self) -> dict:
        return {
            "balanced": self.balanced,
            "witness": None if self.witness is None else self.witness.describe(),
            "residual": None if self.residual is None else [str(x) for x in self.residual],
        }


@dataclass
class WeightedCycle:
    fan: Fan
    weights: dict  # cone maximal -> peso
    verdict: Optional[BalanceVerdict] = None
    orientations: dict = field(default_factory=dict)

    def __post_init__(self):
        dims = {c.dim for c in self.weights}
        if len(dims) > 1:
            raise InvariantViolation(f"weighted cones of dimensions {sorted(dims)}",
                                     invariant="WeightedCycle: pure dimension")
        for cone in self.weights:
            if cone not in self.fan:
                raise InvariantViolation(f"weighted cone {cone.rays} is not in the fan",
                                         invariant="WeightedCycle: cones in fan")

    @property
    def dimension(self) -> int:
        return next(iter(self.weights)).dim if self.weights else 0

    def top_cones(self) -> list[Cone]:
        return sorted(self.weights, key=cone_sort_key)

    def oriented(self, cone: Cone) -> OrientedCone:
        if cone not in self.orientations:
            self.orientations[cone] = orientation_generator(cone)
        return self.orientations[cone]

    def describe(self) -> dict:
        rays = sorted({r for c in self.weights for r in c.rays})
        return {
            "lattice_rank": self.fan.n,
            "rays": [list(r) for r in rays],
            "cones": [[rays.index(r) for r in c.rays] for c in self.top_cones()],
            "weights": [str(self.weights[c]) for c in self.top_cones()],
        }


def _dual_cones(polytope: NewtonPolytope, u: tuple, v: tuple) -> list[Cone]:
    n = len(u)
    d = polytope.dim
    normals = [normal for normal, on_facet in polytope.facets if u in on_facet and v in on_facet]
    direction_rows = [[int(x) for x in clear_denominators(b)] for b in polytope.direction.basis]
    lineality = integer_kernel_basis(direction_rows, n)
    if not lineality and not normals and d == 1:
        return [Cone.zero(n)]
    cones = []
    for signs in product((1, -1), repeat=len(lineality)):
        gens = list(normals) + [tuple(s * x for x in l) for s, l in zip(signs, lineality)]
        cones.append(Cone.from_generators(gens, n) if gens else Cone.zero(n))
    return cones


def trop_hypersurface(f: Polynomial) -> WeightedCycle:
    """Esqueleto de codimensão 1 do leque normal de Newt(f), pesos = comprimentos de rede"""
    if len(f.terms) < 2:
        raise InvariantViolation("a monomial has an empty tropical hypersurface",
                                 invariant="trop_hypersurface: f is not a monomial")
    polytope = newton_polytope(f.exponents)
    weights = {}
    for u, v, length in polytope.edges:
        for cone in _dual_cones(polytope, u, v):
            weights[cone] = weights.get(cone, 0) + length
    fan = Fan.from_cones(weights, Lattice(f.n))
    cycle = WeightedCycle(fan, weights)
    cycle.verdict = check_balanced(cycle)
    log.debug("tropical hypersurface: {} top cones", len(weights))
    return cycle


def _quotient_index(tau: Cone, r: Sequence[int]) -> int:
    # φ(r): índice de r na rede quociente Span_Z(P)/Span_Z(τ)
    basis = [list(b) for b in tau.lattice_basis] + [list(r)]
    g = 0
    for x in wedge_coordinates(basis, tau.ambient_dim):
        g = gcd(g, abs(int(x)))
    return g


def primitive_normal(cone: Cone, tau: Cone) -> tuple:
    """u_{P/τ} como vetor racional: r_P/φ(r_P) para um raio de P fora de Span(τ)"""
    r = next(x for x in cone.rays if not tau.span.contains(x))
    index = _quotient_index(tau, r)
    return tuple(Rational(x, index) for x in r)


def check_balanced(c: WeightedCycle) -> BalanceVerdict:
    """Σ_{P⊃τ} m_P u_{P/τ} ∈ Span(τ) em todo cone τ de codimensão 1"""
    d = c.dimension
    if d == 0:
        return BalanceVerdict(True)
    for tau in c.fan.cones_of_dim(d - 1, orbit_only=True):
        adjacent = [p for p in c.top_cones() if p.has_face(tau)]
        total = [Rational(0)] * c.fan.n
        for cone in adjacent:
            u = primitive_normal(cone, tau)
            total = [t + Rational(c.weights[cone]) * x for t, x in zip(total, u)]
        if not tau.span.contains(total):
            log.debug("unbalanced at {}: residual {}", tau.rays, total)
            return BalanceVerdict(False, tau, tuple(total))
    return BalanceVerdict(True)


def weighted_chain(c: WeightedCycle, p: int) -> TropChain:
    """(-1)^{p(p-1)/2} Σ_P m_P 1_{∧^p Span_Z P} ⊗ [P]"""
    if c.weights and c.dimension != p:
        raise DegreeError(f"cycle of dimension {c.dimension} cannot give a ({p},{p})-chain")
    verdict = check_balanced(c)
    if not verdict.balanced:
        raise UnbalancedCycleError(f"cycle is unbalanced at {list(verdict.witness.rays)}")
    sign = -1 if (p * (p - 1) // 2) % 2 else 1
    chain = TropChain(p)
    for cone in c.top_cones():
        generator = c.oriented(cone).generator
        chain.add(cone, [sign * c.weights[cone] * Rational(x) for x in generator])
    if not chain_boundary(chain, c.fan).is_zero():
        raise InvariantViolation("weighted chain of a balanced cycle has nonzero boundary",
                                 invariant="weighted_chain: ∂ = 0")
    return chain


def weight_of(chain: TropChain, cone: Cone):
    """Peso escalar do coeficiente em P relativo a 1_{∧^q Span_Z P}"""
    values = chain.coefficient(cone)
    if values is None:
        return 0
    generator = orientation_generator(cone).generator
    pivot = next(i for i, x in enumerate(generator) if x != 0)
    weight = values[pivot] / generator[pivot]
    for x, v in zip(generator, values):
        if abs(complex(v) - complex(weight) * x) > 1e-9 * max(1.0, abs(complex(weight))):
            raise InvariantViolation(f"coefficient on {cone.rays} is not a multiple of 1_P",
                                     invariant="TropChainClass: coefficient in F_p(P)")
    return weight


def pushforward(c: WeightedCycle, psi: Sequence[Sequence[int]]) -> WeightedCycle:
    """ψ_*: imagens dos cones de topo com pesos multiplicados pelo índice de rede

    Cones que colapsam são descartados; imagens sobrepostas são refinadas e os pesos somados.
    """
    a = Matrix([[int(x) for x in row] for row in psi])
    if a.cols != c.fan.n:
        raise InvariantViolation(f"map has {a.cols} columns for a lattice of rank {c.fan.n}",
                                 invariant="pushforward: dimensions")
    target = a.rows
    images, factors = [], []
    for cone in c.top_cones():
        rays = [tuple(int(x) for x in a * Matrix(r)) for r in cone.rays]
        rays = [r for r in rays if any(r)]
        if (rank(to_matrix(rays, target)) if rays else 0) < cone.dim:
            continue
        lattice = [list(a * Matrix(list(b))) for b in cone.lattice_basis]
        index = 0
        for x in wedge_coordinates(lattice, target) if lattice else (1,):
            index = gcd(index, abs(int(x)))
        images.append(Cone.from_generators(rays, target) if rays else Cone.zero(target))
        factors.append(c.weights[cone] * index)
    weights = {}
    for pieces, factor in zip(arrangement_refinement(images), factors):
        for piece in pieces:
            weights[piece] = weights.get(piece, 0) + factor
    weights = {k: v for k, v in weights.items() if v != 0}
    fan = Fan.from_cones(weights, Lattice(target))
    result = WeightedCycle(fan, weights)
    result.verdict = check_balanced(result)
    log.debug("pushforward: {} top cones from {} images", len(weights), len(images))
    return result


# ---------------------------------------------------------------------------
# wtTrop de cadeias parametrizadas
# ---------------------------------------------------------------------------

@dataclass
class WtTropResult:
    r: int
    chains: dict  # q -> TropChain de grau p = r - q

    def chain(self, q: int) -> TropChain:
        return self.chains.get(q, TropChain(self.r - q))

    @property
    def top(self) -> TropChain:
        return self.chain(self.r // 2)

    def describe(self) -> dict:
        return {str(q): chain.describe() for q, chain in sorted(self.chains.items())}


def _dual_lifts(basis: Sequence[Sequence[int]], n: int) -> list[list]:
    # n_j ∈ Q^n com <m_i, n_j> = δ_ij
    b = Matrix([list(row) for row in basis])
    lifts = b.T * (b * b.T).inv()
    return [list(lifts[:, j]) for j in range(lifts.cols)]


def _cone_weight(chain: "analytic.ParamChain", cone: Cone, r: int, cfg: QuadratureCfg) -> Optional[tuple]:
    q = cone.dim
    face = chain
    for ray in cone.rays:
        image = face.ray_in_coordinates(ray)
        face = analytic.face_map(face, image, cfg)
        if not face.charts:
            return None
    oriented = orientation_generator(cone)
    lattice = [list(b) for b in oriented.orientation]
    sign = -1 if (q * (q - 1) // 2) % 2 else 1
    k = r - 2 * q
    basis = face.coords_basis
    n = chain.n
    size = WedgeIndex(n, q + k).size
    if size == 0:
        return None
    total = [0j] * size
    if not basis:
        subsets = [()]
        lifts = []
    else:
        lifts = _dual_lifts(basis, n)
        subsets = list(combinations(range(len(basis)), k))
    for subset in subsets:
        monomials = [[int(i == j) for j in range(len(basis))] for i in subset]
        value = analytic.log_integral(face, monomials, cfg).value
        wedge = wedge_coordinates(lattice + [lifts[j] for j in subset], n)
        total = [t + sign * value * complex(w) for t, w in zip(total, wedge)]
    return tuple(total)


def wtTrop_chain(chain: "analytic.ParamChain", fan: Fan, r: int,
                 cfg: Optional[QuadratureCfg] = None, threads: int = 1) -> WtTropResult:
    """Σ_P wtTrop(V)_P ⊗ [P] com os pesos dados por integrais logarítmicas nos mapas de face"""
    cfg = cfg or QuadratureCfg()
    analytic.check_admissible(chain)
    if r != chain.dim:
        raise DegreeError(f"chain has real dimension {chain.dim}, expected {r}")
    cones = [c for c in fan.cones if c.orbit is None and 2 * c.dim <= r]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        weights = list(pool.map(lambda c: _cone_weight(chain, c, r, cfg), cones))
    result = WtTropResult(r, {})
    for cone, weight in zip(cones, weights):
        if weight is None:
            continue
        q = cone.dim
        target = result.chains.setdefault(q, TropChain(r - q))
        target.add(Cell.from_cone(cone), [complex(round(w.real, 12), round(w.imag, 12)) for w in weight])
    log.debug("wtTrop computed on {} cones", len(cones))
    return result


# ---------------------------------------------------------------------------
# Oráculo de amostragem
# ---------------------------------------------------------------------------

def sample_tropical_directions(f: Polynomial, eps: float, samples: int, seed: int,
                               spread: float = 3.0, min_norm: float = 1.0) -> np.ndarray:
    """Direções unitárias de -ε log|z| para pontos de V(f) com |−ε log|z|| ≥ min_norm"""
    rng = np.random.default_rng(seed)
    directions = []
    variables = [k for k in range(f.n) if len({e[k] for e in f.exponents}) > 1]
    per_variable = max(1, samples // max(1, len(variables)))
    for k in variables:
        low = min(e[k] for e in f.exponents)
        degree = max(e[k] for e in f.exponents) - low
        for _ in range(per_variable):
            u = rng.uniform(-spread, spread, size=f.n)
            phases = rng.uniform(0, 2 * np.pi, size=f.n)
            z = np.exp(-u / eps + 1j * phases)
            coefficients = np.zeros(degree + 1, dtype=complex)
            for coeff, exponent in f.terms:
                rest = np.prod([z[j] ** exponent[j] for j in range(f.n) if j != k])
                coefficients[degree - (exponent[k] - low)] += complex(coeff) * rest
            for root in np.roots(coefficients):
                if root == 0 or not np.isfinite(root):
                    continue
                point = z.copy()
                point[k] = root
                x = -eps * np.log(np.abs(point))
                norm = np.linalg.norm(x)
                if norm >= min_norm:
                    directions.append(x / norm)
    return np.array(directions).reshape(-1, f.n)
