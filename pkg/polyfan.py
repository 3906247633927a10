"""
Módulo de Cones e Leques Racionais

Este módulo gerencia cones racionais e leques em N_R e na compactificação
parcial ⊔_σ N_σ,R de um leque ambiente Σ,
incluindo:
- Cones por geradores primitivos, órbita σ_P, representação por desigualdades exata
- Faces (inclusive faces de fronteira na compactificação)
- Projeções π_{σ,τ} e bases inteiras de M ∩ σ^⊥
- Geradores de orientação 1_{∧^q Span_Z P}
- Compactificação, refinamento comum e subdivisão estelar
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np
from loguru import logger
from scipy.optimize import linprog
from sympy import Matrix, Rational

from exact_linalg import (
    Subspace,
    annihilator,
    clear_denominators,
    coordinates,
    integer_kernel_basis,
    kernel_basis,
    primitive_vector,
    rank,
    saturate,
    to_matrix,
    wedge_coordinates,
)
from exceptions import DegenerateConeError, FaceError, InvariantViolation, SupportMismatchError

log = logger.bind(module="polyfan")


@dataclass(frozen=True)
class Lattice:
    rank: int
    dual: bool = False  # False: N (cocaracteres), True: M (caracteres)

    def __post_init__(self):
        if self.rank < 1:
            raise InvariantViolation("lattice rank must be >= 1", invariant="Lattice: n >= 1")

    @property
    def role(self) -> str:
        return "M" if self.dual else "N"


def primitive(v: Sequence[int]) -> tuple[int, ...]:
    """Vetor primitivo v / mdc(|coordenadas|)"""
    return primitive_vector(v)


def _dot(a: Sequence, b: Sequence):
    return sum(Rational(x) * Rational(y) for x, y in zip(a, b))


@dataclass(frozen=True)
class Cone:
    rays: tuple  # geradores primitivos ordenados
    ambient_dim: int  # dimensão de N_σ onde os raios vivem
    orbit: Optional["Cone"] = None  # σ ∈ Σ (em coordenadas de N); None = {0}

    @classmethod
    def from_generators(cls, generators: Iterable[Sequence[int]], ambient_dim: int,
                        orbit: Optional["Cone"] = None) -> "Cone":
        """Cria um cone validado: raios primitivos, extremos, cone pontudo"""
        rays = []
        for g in generators:
            g = tuple(int(x) for x in g)
            if len(g) != ambient_dim:
                raise DegenerateConeError(f"generator {g} has wrong length for dimension {ambient_dim}")
            if not any(g):
                continue
            p = primitive(g)
            if p not in rays:
                rays.append(p)
        if rank(to_matrix(rays, ambient_dim)) < len(rays):
            if not _is_pointed(rays):
                raise DegenerateConeError(f"cone generated by {rays} is not strongly convex")
            rays = _extreme_rays(rays)
        return cls(tuple(sorted(rays)), ambient_dim, orbit)

    @classmethod
    def zero(cls, ambient_dim: int, orbit: Optional["Cone"] = None) -> "Cone":
        return cls((), ambient_dim, orbit)

    @cached_property
    def dim(self) -> int:
        return rank(to_matrix(self.rays, self.ambient_dim)) if self.rays else 0

    @property
    def is_simplicial(self) -> bool:
        return len(self.rays) == self.dim

    @property
    def orbit_dim(self) -> int:
        return 0 if self.orbit is None else self.orbit.dim

    def same_orbit(self, other: "Cone") -> bool:
        return self.orbit == other.orbit

    @cached_property
    def span(self) -> Subspace:
        return Subspace.span(self.rays, self.ambient_dim)

    @cached_property
    def lattice_basis(self) -> tuple:
        """Base inteira de Span_Z(P) = Span_Q(P) ∩ Z^k"""
        return tuple(saturate(self.rays, self.ambient_dim))

    @cached_property
    def equalities(self) -> tuple:
        return annihilator(self.span).basis

    @cached_property
    def facet_normals(self) -> tuple:
        """Pares (normal interna inteira, raios da faceta)"""
        d = self.dim
        if d == 0:
            return ()
        if d == 1:
            return ((self.rays[0], ()),)
        basis = self.span.matrix()
        facets = {}
        for chosen in combinations(self.rays, d - 1):
            if rank(to_matrix(chosen, self.ambient_dim)) < d - 1:
                continue
            kernel = kernel_basis(to_matrix(chosen, self.ambient_dim) * basis.T)
            if kernel.dim != 1:
                continue
            normal = list((Matrix([list(kernel.basis[0])]) * basis)[0, :])
            values = [_dot(normal, r) for r in self.rays]
            if any(v > 0 for v in values) and any(v < 0 for v in values):
                continue
            if all(v <= 0 for v in values):
                normal = [-x for x in normal]
            on_facet = tuple(r for r, v in zip(self.rays, values) if v == 0)
            if on_facet not in facets:
                facets[on_facet] = clear_denominators(normal)
        return tuple((n, rays) for rays, n in sorted(facets.items()))

    def contains(self, v: Sequence) -> bool:
        if any(_dot(e, v) != 0 for e in self.equalities):
            return False
        return all(_dot(n, v) >= 0 for n, _ in self.facet_normals)

    def in_relint(self, v: Sequence) -> bool:
        if self.dim == 0:
            return not any(Rational(x) for x in v)
        if any(_dot(e, v) != 0 for e in self.equalities):
            return False
        return all(_dot(n, v) > 0 for n, _ in self.facet_normals)

    def contains_cone(self, other: "Cone") -> bool:
        return self.same_orbit(other) and all(self.contains(r) for r in other.rays)

    def facets(self) -> list["Cone"]:
        return [Cone(rays, self.ambient_dim, self.orbit) for _, rays in self.facet_normals]

    @cached_property
    def _faces(self) -> tuple:
        found = {self}
        stack = [self]
        while stack:
            cone = stack.pop()
            for facet in cone.facets():
                if facet not in found:
                    found.add(facet)
                    stack.append(facet)
        found.add(Cone.zero(self.ambient_dim, self.orbit))
        return tuple(sorted(found, key=cone_sort_key))

    def faces(self) -> list["Cone"]:
        """Todas as faces (inclui o próprio cone e a face mínima)"""
        return list(self._faces)

    def has_face(self, other: "Cone") -> bool:
        return other in self._faces

    def describe(self) -> dict:
        return {
            "rays": [list(r) for r in self.rays],
            "orbit": [] if self.orbit is None else [list(r) for r in self.orbit.rays],
            "dim": self.dim,
        }


def cone_sort_key(cone: Cone):
    orbit_rays = () if cone.orbit is None else cone.orbit.rays
    return (cone.orbit_dim, orbit_rays, cone.dim, cone.rays)


def _linprog(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, bounds=None):
    return linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")


def _is_pointed(rays: list) -> bool:
    # maximize t s.t. <a, r> >= t, |a_i| <= 1
    k = len(rays[0])
    c = np.zeros(k + 1)
    c[-1] = -1.0
    a_ub = np.array([[-float(x) for x in r] + [1.0] for r in rays])
    b_ub = np.zeros(len(rays))
    bounds = [(-1.0, 1.0)] * k + [(None, 1.0)]
    result = _linprog(c, a_ub, b_ub, bounds=bounds)
    if not result.success or -result.fun <= 1e-9:
        return False
    for den in (10**6, 10**9, 10**12):
        witness = [Fraction(float(x)).limit_denominator(den) for x in result.x[:k]]
        if all(sum(a * int(x) for a, x in zip(witness, r)) > 0 for r in rays):
            return True
    raise InvariantViolation(f"LP optimum {-result.fun:.3g} for {rays} has no exact pointedness witness",
                             invariant="Cone: strongly convex")


def _in_cone_of(v: Sequence[int], generators: list) -> bool:
    if not generators:
        return not any(v)
    a_eq = np.array([[float(g[i]) for g in generators] for i in range(len(v))])
    b_eq = np.array([float(x) for x in v])
    result = _linprog(np.zeros(len(generators)), a_eq=a_eq, b_eq=b_eq,
                      bounds=[(0, None)] * len(generators))
    return bool(result.success)


def _extreme_rays(rays: list) -> list:
    kept = list(rays)
    for r in list(rays):
        others = [g for g in kept if g != r]
        if others and _in_cone_of(r, others):
            kept = others
    return kept


# ---------------------------------------------------------------------------
# Órbitas e projeções
# ---------------------------------------------------------------------------

def orbit_basis(sigma: Optional[Cone], n: int) -> tuple:
    """Base canônica (Hermite) de M ∩ σ^⊥; coordenadas da carta N_σ"""
    if sigma is None or not sigma.rays:
        return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return tuple(integer_kernel_basis(sigma.rays, n))


def orbit_projection(sigma: Cone, tau: Cone) -> Matrix:
    """Matriz de π_{σ,τ}: N_τ → N_σ nas coordenadas das bases de M∩τ^⊥ e M∩σ^⊥"""
    if sigma.orbit is not None or tau.orbit is not None:
        raise FaceError("orbit cones must live in N_R")
    if not sigma.has_face(tau):
        raise FaceError(f"{tau.rays} is not a face of {sigma.rays}")
    n = sigma.ambient_dim
    b_tau = orbit_basis(tau, n)
    b_sigma = orbit_basis(sigma, n)
    if not b_sigma:
        return Matrix.zeros(0, len(b_tau))
    space = Subspace.span(b_tau, n)
    rows = []
    for m in b_sigma:
        # coordenadas de m na base b_tau (as linhas de b_tau são independentes)
        solution, params = to_matrix(b_tau, n).T.gauss_jordan_solve(Matrix(m))
        if params.shape[0]:
            solution = solution.subs({s: 0 for s in params})
        if not space.contains(m):
            raise FaceError("sigma-perp is not contained in tau-perp")
        rows.append(list(solution))
    return Matrix(rows)


def to_orbit_coordinates(v: Sequence, sigma: Optional[Cone], n: int) -> tuple:
    basis = orbit_basis(sigma, n)
    return tuple(int(_dot(m, v)) for m in basis)


def image_in_orbit(cone_orbit: Optional[Cone], tau: Cone, n: int) -> Matrix:
    """Matriz da projeção das coordenadas de N_{órbita do cone} para N_τ"""
    source = cone_orbit if cone_orbit is not None else Cone.zero(n)
    return orbit_projection(tau, source)


def project_cone(cone: Cone, tau: Cone, n: int) -> Cone:
    """π_τ(P) para P numa órbita σ ⊆ τ"""
    projection = image_in_orbit(cone.orbit, tau, n)
    images = []
    for r in cone.rays:
        image = projection * Matrix(r)
        if any(image):
            images.append(tuple(int(x) for x in image))
    return Cone.from_generators(images, projection.rows, tau if tau.rays else None)


def orbit_image(tau: Cone, sigma: Optional[Cone], n: int) -> Cone:
    """τ̄: imagem de τ ⊇ σ nas coordenadas de N_σ (um cone da estrela de σ)"""
    sigma = sigma if sigma is not None else Cone.zero(n)
    projection = orbit_projection(sigma, Cone.zero(n)) if sigma.rays else Matrix.eye(n)
    generators = []
    for r in tau.rays:
        image = projection * Matrix(r)
        if any(image):
            generators.append(tuple(int(x) for x in image))
    return Cone.from_generators(generators, projection.rows)


def meets_relint(cone: Cone, tau: Cone, n: int) -> bool:
    """P ∩ relint(τ̄) ≠ ∅, com τ̄ a imagem de τ na carta da órbita de P"""
    sigma = cone.orbit if cone.orbit is not None else Cone.zero(n)
    if not tau.has_face(sigma) or tau == sigma:
        return False
    tau_bar = orbit_image(tau, sigma, n)
    inside = [r for r in cone.rays if tau_bar.contains(r)]
    if not inside:
        return False
    total = [sum(r[i] for r in inside) for i in range(cone.ambient_dim)]
    return tau_bar.in_relint(total)


# ---------------------------------------------------------------------------
# Orientação
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrientedCone:
    cone: Cone
    orientation: tuple  # base ordenada de Span_Z(P), com o sinal ajustado
    generator: tuple  # coordenadas de 1_{∧^q Span_Z P} na base e_I


def orientation_generator(cone: Cone, order: Optional[Sequence[Sequence[int]]] = None) -> OrientedCone:
    """Gerador de ∧^q Span_Z P com sinal positivo para a forma de volume de `order`"""
    order = [tuple(r) for r in (order if order is not None else cone.rays)]
    q = cone.dim
    if len(order) != q or (q and rank(to_matrix(order, cone.ambient_dim)) < q):
        raise DegenerateConeError(f"order {order} does not give a basis of Span(P)")
    if any(not cone.contains(r) for r in order):
        raise DegenerateConeError("order vectors must lie in the cone")
    basis = [list(b) for b in cone.lattice_basis]
    if q:
        # coordenadas de `order` na base inteira; o sinal do determinante fixa a orientação
        coords = Matrix([_coordinates_in(basis, r, cone.ambient_dim) for r in order])
        if coords.det() < 0:
            basis[0] = [-x for x in basis[0]]
    generator = wedge_coordinates(basis, cone.ambient_dim)
    return OrientedCone(cone, tuple(tuple(b) for b in basis), tuple(int(x) for x in generator))


def _coordinates_in(basis: list, v: Sequence, n: int) -> list:
    return list(coordinates(Subspace(n, tuple(tuple(Rational(x) for x in b) for b in basis)), v))


# ---------------------------------------------------------------------------
# Leques
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Fan:
    lattice: Lattice
    cones: tuple  # fechado por faces, ordenado
    ambient: Optional["Fan"] = None  # Σ
    name: str = field(default="", compare=False)

    @classmethod
    def from_maximal(cls, lattice_rank: int, rays: Sequence[Sequence[int]],
                     cones: Sequence[Sequence[int]], ambient: Optional["Fan"] = None,
                     check: bool = True, name: str = "") -> "Fan":
        lattice = Lattice(lattice_rank)
        maximal = []
        for indices in cones:
            try:
                chosen = [rays[i] for i in indices]
            except IndexError:
                raise InvariantViolation(f"cone {list(indices)} references a missing ray",
                                         invariant="Fan: ray indices")
            maximal.append(Cone.from_generators(chosen, lattice_rank))
        for r in rays:
            if any(r) and not any(primitive(r) in c.rays for c in maximal):
                maximal.append(Cone.from_generators([r], lattice_rank))
        if not maximal:
            maximal.append(Cone.zero(lattice_rank))
        return cls.from_cones(maximal, lattice, ambient=ambient, check=check, name=name)

    @classmethod
    def from_cones(cls, cones: Iterable[Cone], lattice: Lattice, ambient: Optional["Fan"] = None,
                   check: bool = True, name: str = "") -> "Fan":
        closed = set()
        for cone in cones:
            closed.update(cone.faces())
        fan = cls(lattice, tuple(sorted(closed, key=cone_sort_key)), ambient, name)
        if check:
            fan.validate()
        return fan

    @property
    def n(self) -> int:
        return self.lattice.rank

    @cached_property
    def maximal_cones(self) -> tuple:
        return tuple(c for c in self.cones
                     if not any(o != c and o.same_orbit(c) and o.has_face(c) for o in self.cones))

    @property
    def origin(self) -> Cone:
        return Cone.zero(self.n)

    @property
    def dimension(self) -> int:
        return max((c.dim for c in self.cones), default=0)

    def cones_of_dim(self, d: int, orbit_only: bool = False) -> list:
        return [c for c in self.cones if c.dim == d and (not orbit_only or c.orbit is None)]

    def is_pure(self) -> bool:
        dims = {c.dim for c in self.maximal_cones if c.orbit is None}
        return len(dims) <= 1

    def is_simplicial(self) -> bool:
        return all(c.is_simplicial for c in self.cones)

    def __contains__(self, cone: Cone) -> bool:
        return cone in self._cone_set

    @cached_property
    def _cone_set(self) -> frozenset:
        return frozenset(self.cones)

    @cached_property
    def face_relations(self) -> tuple:
        """Pares (face, cone) com testemunha de inclusão (mesma órbita ou projeção)"""
        relations = []
        for parent in self.cones:
            for child in self.cones:
                if child != parent and self.is_face(child, parent):
                    relations.append((child, parent))
        return tuple(relations)

    def closure_in_orbit(self, parent: Cone, tau: Cone) -> Optional[Cone]:
        """Q = P ∩ Trop(O(τ)): a parte do fecho de P na órbita τ"""
        if parent.orbit == (tau if tau.rays else None):
            return parent
        if self.ambient is None or not meets_relint(parent, tau, self.n):
            return None
        return project_cone(parent, tau, self.n)

    def is_face(self, child: Cone, parent: Cone) -> bool:
        if child.same_orbit(parent):
            return parent.has_face(child)
        if self.ambient is None or child.orbit is None:
            return False
        q = self.closure_in_orbit(parent, child.orbit)
        return q is not None and q.has_face(child)

    def containing(self, cone: Cone) -> list:
        """Cones P' da mesma órbita com relint(P) ⊆ P'"""
        return [c for c in self.cones if c.same_orbit(cone) and c.has_face(cone)]

    def validate(self) -> None:
        for cone in self.cones:
            for face in cone.faces():
                if face not in self:
                    raise InvariantViolation(f"face {face.rays} of {cone.rays} missing",
                                             invariant="Fan: closed under faces")
            if cone.orbit is not None:
                if self.ambient is None or cone.orbit not in self.ambient:
                    raise InvariantViolation(f"orbit {cone.orbit.rays} is not a cone of the ambient fan",
                                             invariant="Fan: ambient_orbit consistent with Σ")
        for a, b in combinations(self.maximal_cones, 2):
            if a.same_orbit(b) and not _meets_properly(a, b):
                raise InvariantViolation(f"cones {a.rays} and {b.rays} do not meet in a common face",
                                         invariant="Fan: intersections are common faces")
        log.debug("fan validated: {} cones", len(self.cones))

    def describe(self) -> dict:
        return {
            "lattice_rank": self.n,
            "cones": [c.describe() for c in self.cones],
        }


def _meets_properly(a: Cone, b: Cone) -> bool:
    common = tuple(sorted(set(a.rays) & set(b.rays)))
    g = Cone(common, a.ambient_dim, a.orbit)
    if not (a.has_face(g) and b.has_face(g)):
        return False
    outside = [r for r in a.rays if r not in common]
    if not outside:
        return True
    # λ ≥ 0, μ ≥ 0 com Σλ a_i = Σμ b_j e Σ_{a_i ∉ G} λ_i = 1: interseção maior que G
    k = a.ambient_dim
    na, nb = len(a.rays), len(b.rays)
    a_eq = [[float(r[i]) for r in a.rays] + [-float(r[i]) for r in b.rays] for i in range(k)]
    a_eq.append([1.0 if r in outside else 0.0 for r in a.rays] + [0.0] * nb)
    b_eq = [0.0] * k + [1.0]
    result = _linprog(np.zeros(na + nb), a_eq=np.array(a_eq), b_eq=np.array(b_eq),
                      bounds=[(0, None)] * (na + nb))
    return not result.success


# ---------------------------------------------------------------------------
# Construções
# ---------------------------------------------------------------------------

def compactify(fan: Fan, ambient: Fan) -> Fan:
    """Fecho de Λ em Trop(T_Σ): acrescenta π_σ(P) sempre que P ∩ relint(σ) ≠ ∅"""
    if fan.n != ambient.n:
        raise SupportMismatchError("fan and ambient fan live in different lattices")
    for cone in fan.maximal_cones:
        if cone.orbit is not None:
            continue
        if not any(sigma.contains_cone(cone) for sigma in ambient.cones):
            raise SupportMismatchError(f"cone {cone.rays} is not contained in a cone of the ambient fan")
    cones = set(c for c in fan.cones if c.orbit is None)
    for cone in list(cones):
        for sigma in ambient.cones:
            if sigma.rays and meets_relint(cone, sigma, fan.n):
                cones.add(project_cone(cone, sigma, fan.n))
    result = Fan.from_cones(cones, fan.lattice, ambient=ambient, name=fan.name)
    log.debug("compactified fan: {} cones ({} at the boundary)", len(result.cones),
              sum(1 for c in result.cones if c.orbit is not None))
    return result


def stellar_subdivide(fan: Fan, cone: Cone) -> Fan:
    """Subdivisão estelar de Λ no raio primitivo da soma dos raios de P"""
    if cone not in fan:
        raise FaceError(f"cone {cone.rays} is not in the fan")
    if cone.dim <= 1:
        return fan
    if not cone.is_simplicial:
        raise DegenerateConeError("stellar subdivision needs a simplicial cone")
    new_ray = primitive([sum(r[i] for r in cone.rays) for i in range(cone.ambient_dim)])
    maximal = []
    for c in fan.maximal_cones:
        if c.same_orbit(cone) and c.has_face(cone):
            for r in cone.rays:
                rays = [x for x in c.rays if x != r] + [new_ray]
                maximal.append(Cone.from_generators(rays, c.ambient_dim, c.orbit))
        else:
            maximal.append(c)
    return Fan.from_cones(maximal, fan.lattice, ambient=fan.ambient, name=fan.name)


def intersect(a: Cone, b: Cone) -> Cone:
    """Interseção exata de dois cones da mesma órbita"""
    if not a.same_orbit(b):
        raise FaceError("cones live in different orbits")
    k = a.ambient_dim
    equalities = list(a.equalities) + list(b.equalities)
    space = kernel_basis(to_matrix(equalities, k)) if equalities else Subspace.full(k)
    w = space.dim
    if w == 0:
        return Cone.zero(k, a.orbit)
    basis = space.matrix()
    normals = [n for n, _ in a.facet_normals] + [n for n, _ in b.facet_normals]
    reduced = [list(Matrix([list(n)]) * basis.T) for n in normals]

    def feasible(y) -> bool:
        return all(sum(Rational(c) * Rational(v) for c, v in zip(row, y)) >= 0 for row in reduced)

    candidates = []
    if w == 1:
        candidates = [[1], [-1]]
    else:
        for chosen in combinations(reduced, w - 1):
            m = Matrix([list(row) for row in chosen])
            if rank(m) != w - 1:
                continue
            null = kernel_basis(m)
            y = list(null.basis[0])
            candidates.extend([y, [-x for x in y]])
    rays = []
    for y in candidates:
        if not feasible(y):
            continue
        v = list(Matrix([y]) * basis)
        rays.append(clear_denominators(v))
    if not rays:
        return Cone.zero(k, a.orbit)
    return Cone.from_generators(rays, k, a.orbit)


def _covers(cone: Cone, pieces: list) -> bool:
    full = [p for p in pieces if p.dim == cone.dim]
    if cone.dim == 0:
        return True
    if not full:
        return False
    boundary_normals = [n for n, _ in cone.facet_normals]
    for piece in full:
        for _, facet_rays in piece.facet_normals:
            on_boundary = any(all(_dot(n, r) == 0 for r in facet_rays) for n in boundary_normals)
            if cone.dim == 1:
                on_boundary = True
            if on_boundary:
                continue
            shared = any(other != piece and any(rays == facet_rays for _, rays in other.facet_normals)
                         for other in full)
            if not shared:
                return False
    return True


def common_refinement(f1: Fan, f2: Fan) -> Fan:
    """Leque de todas as interseções c1 ∩ c2; exige suportes iguais"""
    if f1.n != f2.n:
        raise SupportMismatchError("fans live in different lattices")
    if any(c.orbit is not None for c in f1.cones + f2.cones):
        raise SupportMismatchError("refine fans before compactifying them")
    pieces_by_first = {c: [] for c in f1.maximal_cones}
    pieces_by_second = {c: [] for c in f2.maximal_cones}
    pieces = []
    for a in f1.maximal_cones:
        for b in f2.maximal_cones:
            piece = intersect(a, b)
            pieces.append(piece)
            pieces_by_first[a].append(piece)
            pieces_by_second[b].append(piece)
    for cone, found in list(pieces_by_first.items()) + list(pieces_by_second.items()):
        if not _covers(cone, found):
            raise SupportMismatchError(f"cone {cone.rays} is not covered by the other fan")
    refined = Fan.from_cones(pieces, f1.lattice, ambient=f1.ambient)
    log.debug("common refinement: {} maximal cones", len(refined.maximal_cones))
    return refined


def split_cone(cone: Cone, normal: Sequence[int]) -> list[Cone]:
    """Partes de dimensão cheia de cone ∩ {⟨h,x⟩ ≥ 0} e cone ∩ {⟨h,x⟩ ≤ 0}"""
    values = [int(_dot(normal, r)) for r in cone.rays]
    positive = [(v, r) for v, r in zip(values, cone.rays) if v > 0]
    negative = [(v, r) for v, r in zip(values, cone.rays) if v < 0]
    if not positive or not negative:
        return [cone]
    on_wall = [r for v, r in zip(values, cone.rays) if v == 0]
    # vp·rn - vn·rp está em h^⊥ com coeficientes positivos
    crossing = [tuple(vp * a - vn * b for a, b in zip(rn, rp)) for vp, rp in positive for vn, rn in negative]
    pieces = []
    for side in (positive, negative):
        piece = Cone.from_generators([r for _, r in side] + on_wall + crossing, cone.ambient_dim, cone.orbit)
        if piece.dim == cone.dim:
            pieces.append(piece)
    return pieces


def _hyperplanes(cones: Sequence[Cone]) -> list[tuple[int, ...]]:
    found = set()
    for cone in cones:
        normals = [primitive(n) for n, _ in cone.facet_normals]
        normals += [clear_denominators(e) for e in cone.equalities]
        for n in normals:
            if next(x for x in n if x) < 0:
                n = tuple(-x for x in n)
            found.add(n)
    return sorted(found)


def arrangement_refinement(cones: Sequence[Cone]) -> list[list[Cone]]:
    """Subdivide cada cone pelo arranjo de hiperplanos de facetas e spans de todos

    Partes sobrepostas de cones distintos saem idênticas e se encontram em faces comuns.
    """
    hyperplanes = _hyperplanes(cones)
    refined = []
    for cone in cones:
        pieces = [cone]
        for h in hyperplanes:
            pieces = [p for piece in pieces for p in split_cone(piece, h)]
        refined.append(pieces)
    log.debug("arrangement refinement: {} hyperplanes, {} pieces", len(hyperplanes),
              sum(len(p) for p in refined))
    return refined
