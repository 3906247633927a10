"""
Módulo de Homologia Tropical

Este módulo gerencia os sistemas de coeficientes F_p(P,Λ) e F^p(P,Λ) de um leque,
incluindo:
- Espaços de coeficientes e mapas de restrição i_{P₂⊂P₁}
- O complexo celular de cadeias tropicais com ∂∘∂ = 0 verificado exatamente
- Postos de homologia e cohomologia sobre Q
- A apresentação F^p(0, Λ) dos K-grupos tropicais (dimensão e anulador J₀)
- Cadeias tropicais formais e seu bordo celular
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from loguru import logger
from sympy import Matrix, Rational

from exact_linalg import (
    Subspace,
    WedgeIndex,
    annihilator,
    coordinates,
    rank,
    subspace_sum,
    wedge_map,
    wedge_power_span,
)
from exceptions import DegenerateConeError, DegreeError, FaceError, InvariantViolation
from polyfan import Cone, Fan, orbit_image, orbit_projection, primitive, project_cone

log = logger.bind(module="tropcoh")


@dataclass(frozen=True)
class CoefSpace:
    cone: Cone
    p: int
    space: Subspace  # F_p dentro de ∧^p N_{σ_P,Q}

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def dual_dim(self) -> int:
        """dim F^p(P) = dim F_p(P)"""
        return self.space.dim


@dataclass(frozen=True)
class RestrictionMap:
    source: CoefSpace
    target: CoefSpace
    matrix: Matrix  # target.dim × source.dim


def _check_degree(p: int) -> None:
    if p < 0:
        raise DegreeError(f"degree {p} must be non-negative")


def coefficient_space(cone: Cone, fan: Fan, p: int) -> CoefSpace:
    """F_p(P,Λ) = Σ ∧^p Span(P') sobre os P' da mesma órbita que contêm relint(P)"""
    _check_degree(p)
    if cone not in fan:
        raise FaceError(f"cone {cone.rays} is not in the fan")
    k = cone.ambient_dim
    size = WedgeIndex(k, p).size
    if p > k:
        return CoefSpace(cone, p, Subspace.zero(size))
    spaces = [wedge_power_span(c.span, p) for c in fan.containing(cone)]
    return CoefSpace(cone, p, subspace_sum(spaces, size))


def face_transform(parent: Cone, face: Cone, fan: Fan, p: int) -> Matrix:
    """Aplicação em ∧^p: identidade na mesma órbita, ∧^p π_{τ,σ} entre órbitas"""
    if parent.same_orbit(face):
        return Matrix.eye(WedgeIndex(parent.ambient_dim, p).size)
    sigma = parent.orbit if parent.orbit is not None else Cone.zero(fan.n)
    projection = orbit_projection(face.orbit, sigma)
    return wedge_map(projection, p)


def restriction(p1: Cone, p2: Cone, fan: Fan, p: int) -> RestrictionMap:
    """i_{P₂⊂P₁}: F_p(P₁) → F_p(P₂), composto da projeção de órbita e da inclusão"""
    source = coefficient_space(p1, fan, p)
    target = coefficient_space(p2, fan, p)
    if p1 == p2:
        return RestrictionMap(source, target, Matrix.eye(source.dim))
    if not fan.is_face(p2, p1):
        raise FaceError(f"{p2.rays} is not a face of {p1.rays}")
    transform = face_transform(p1, p2, fan, p)
    columns = []
    for b in source.space.basis:
        image = list(transform * Matrix(list(b)))
        try:
            columns.append(list(coordinates(target.space, image)))
        except InvariantViolation:
            raise InvariantViolation(
                f"image of F_{p}({p1.rays}) is not contained in F_{p}({p2.rays})",
                invariant="RestrictionMap: maps F_p(P1) into F_p(P2)",
            )
    if not columns:
        return RestrictionMap(source, target, Matrix.zeros(target.dim, 0))
    return RestrictionMap(source, target, Matrix(columns).T)


def _permutation_sign(order: Sequence, reference: Sequence) -> int:
    positions = [list(reference).index(x) for x in order]
    inversions = sum(1 for i in range(len(positions)) for j in range(i + 1, len(positions))
                     if positions[i] > positions[j])
    return -1 if inversions % 2 else 1


def cell_incidences(cone: Cone, fan: Optional[Fan]) -> list[tuple[Cone, int]]:
    """Faces de codimensão 1 de uma célula com seus sinais de incidência"""
    result = []
    for i, r in enumerate(cone.rays):
        rest = tuple(x for x in cone.rays if x != r)
        result.append((Cone(rest, cone.ambient_dim, cone.orbit), -1 if i % 2 else 1))
    if fan is None or fan.ambient is None:
        return result
    sigma = cone.orbit
    for r in cone.rays:
        for tau in fan.ambient.cones:
            if tau == sigma or not tau.rays or not tau.has_face(sigma or Cone.zero(fan.n)):
                continue
            if not orbit_image(tau, sigma, fan.n).in_relint(r):
                continue
            others = [x for x in cone.rays if x != r]
            boundary = project_cone(Cone(tuple(others), cone.ambient_dim, sigma), tau, fan.n)
            if boundary.dim != cone.dim - 1:
                continue
            if boundary not in fan:
                raise InvariantViolation(
                    f"boundary cell {boundary.rays} of {cone.rays} missing; compactify the fan first",
                    invariant="Fan: closed under faces",
                )
            projection = orbit_projection(tau, sigma or Cone.zero(fan.n))
            preimage = {}
            for x in others:
                image = tuple(int(v) for v in projection * Matrix(x))
                preimage[primitive(image)] = x
            order = [r] + [preimage[b] for b in boundary.rays]
            result.append((boundary, -_permutation_sign(order, cone.rays)))
    return result


@dataclass
class CellComplex:
    fan: Fan
    p: int
    cells: dict = field(default_factory=dict)  # q -> lista de células
    spaces: dict = field(default_factory=dict)  # célula -> CoefSpace
    boundaries: dict = field(default_factory=dict)  # q -> ∂_q: C_q → C_{q-1}

    def chain_dim(self, q: int) -> int:
        return sum(self.spaces[c].dim for c in self.cells.get(q, []))

    def offsets(self, q: int) -> dict:
        offset, result = 0, {}
        for c in self.cells.get(q, []):
            result[c] = offset
            offset += self.spaces[c].dim
        return result

    @property
    def top_degree(self) -> int:
        return max(self.cells, default=-1)


def build_complex(fan: Fan, p: int) -> CellComplex:
    """Complexo celular de (p,q)-cadeias tropicais de um leque simplicial"""
    _check_degree(p)
    if not fan.is_simplicial():
        bad = next(c for c in fan.cones if not c.is_simplicial)
        raise DegenerateConeError(f"cone {bad.rays} is not simplicial; subdivide the fan first")
    cc = CellComplex(fan, p)
    for cone in fan.cones:
        cc.cells.setdefault(cone.dim, []).append(cone)
        cc.spaces[cone] = coefficient_space(cone, fan, p)
    for q in sorted(cc.cells):
        if q == 0:
            continue
        rows, cols = cc.offsets(q - 1), cc.offsets(q)
        boundary = Matrix.zeros(cc.chain_dim(q - 1), cc.chain_dim(q))
        for cell in cc.cells[q]:
            for face, sign in cell_incidences(cell, fan):
                block = restriction(cell, face, fan, p).matrix
                r0, c0 = rows[face], cols[cell]
                for i in range(block.rows):
                    for j in range(block.cols):
                        boundary[r0 + i, c0 + j] += sign * block[i, j]
        cc.boundaries[q] = boundary
    for q in cc.boundaries:
        if q - 1 in cc.boundaries:
            product = cc.boundaries[q - 1] * cc.boundaries[q]
            if any(x != 0 for x in product):
                raise InvariantViolation(f"boundary squares to a nonzero map in degree {q}",
                                         invariant="CellComplex: ∂∘∂ = 0")
    log.debug("complex built: p={}, cells={}", p, {q: len(c) for q, c in sorted(cc.cells.items())})
    return cc


@dataclass
class HomologyResult:
    p: int
    chain_dims: dict
    homology: dict  # q -> posto de H_{p,q}
    cohomology: dict  # q -> posto de H^{p,q}

    def rank(self, q: int) -> int:
        return self.homology.get(q, 0)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "chain_dims": {str(q): d for q, d in sorted(self.chain_dims.items())},
            "homology": {str(q): r for q, r in sorted(self.homology.items())},
            "cohomology": {str(q): r for q, r in sorted(self.cohomology.items())},
        }


def homology(cc: CellComplex, threads: int = 1) -> HomologyResult:
    """Postos de H_{p,q} = ker ∂_q / im ∂_{q+1} e de H^{p,q} pelos transpostos"""
    degrees = sorted(set(cc.cells) | {0})
    matrices = [(q, m) for q, m in sorted(cc.boundaries.items())]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        ranks = dict(zip([q for q, _ in matrices], pool.map(lambda item: rank(item[1]), matrices)))
        coranks = dict(zip([q for q, _ in matrices], pool.map(lambda item: rank(item[1].T), matrices)))
    dims = {q: cc.chain_dim(q) for q in degrees}
    result_h, result_c = {}, {}
    for q in degrees:
        result_h[q] = dims[q] - ranks.get(q, 0) - ranks.get(q + 1, 0)
        # δ_q = ∂_{q+1}^T : C^q → C^{q+1}
        result_c[q] = dims[q] - coranks.get(q + 1, 0) - coranks.get(q, 0)
        if result_h[q] < 0 or result_c[q] < 0:
            raise InvariantViolation("negative homology rank", invariant="HomologyResult: ranks >= 0")
    return HomologyResult(cc.p, dims, result_h, result_c)


def fan_homology(fan: Fan, p: int, threads: int = 1) -> HomologyResult:
    return homology(build_complex(fan, p), threads=threads)


@dataclass(frozen=True)
class KGroupResult:
    p: int
    dim: int  # dim F^p(0, Λ)
    kernel: Subspace  # J₀ ⊂ ∧^p M_Q

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "dim": self.dim,
            "kernel": [[str(x) for x in v] for v in self.kernel.basis],
        }


def tropical_K_F0(fan: Fan, p: int) -> KGroupResult:
    """F^p(0,Λ) = ∧^p M_Q / J₀, com J₀ o anulador de F_p(0,Λ)"""
    origin = Cone.zero(fan.n)
    if origin not in fan:
        raise FaceError("the fan does not contain the origin")
    if p > fan.n:
        return KGroupResult(p, 0, Subspace.zero(0))
    space = coefficient_space(origin, fan, p)
    return KGroupResult(p, space.dim, annihilator(space.space))


# ---------------------------------------------------------------------------
# Cadeias tropicais formais
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    """Célula γ(s,t) = Σ s_i v_i + Σ t_j r_j (s no simplexo, t ≥ 0) numa carta de órbita"""

    vertices: tuple
    rays: tuple = ()
    orbit: Optional[Cone] = None

    @classmethod
    def from_cone(cls, cone: Cone) -> "Cell":
        return cls(((0,) * cone.ambient_dim,), cone.rays, cone.orbit)

    @classmethod
    def simplex(cls, vertices: Sequence[Sequence], orbit: Optional[Cone] = None) -> "Cell":
        return cls(tuple(tuple(v) for v in vertices), (), orbit)

    @property
    def ambient_dim(self) -> int:
        return len(self.vertices[0])

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1 + len(self.rays)

    @property
    def is_cone(self) -> bool:
        return len(self.vertices) == 1 and not any(self.vertices[0])

    def as_cone(self) -> tuple[Cone, int]:
        """O cone da célula e o sinal da ordem dos raios relativa à ordem canônica"""
        cone = Cone(tuple(sorted(self.rays)), self.ambient_dim, self.orbit)
        return cone, _permutation_sign(self.rays, cone.rays)

    def edge_matrix(self) -> Matrix:
        """Colunas v_i - v_0 seguidas dos raios: a diferencial de γ"""
        base = self.vertices[0]
        columns = [[Rational(a) - Rational(b) for a, b in zip(v, base)] for v in self.vertices[1:]]
        columns += [[Rational(x) for x in r] for r in self.rays]
        if not columns:
            return Matrix.zeros(self.ambient_dim, 0)
        return Matrix(columns).T

    def describe(self) -> dict:
        return {
            "vertices": [[str(x) for x in v] for v in self.vertices],
            "rays": [list(r) for r in self.rays],
            "orbit": [] if self.orbit is None else [list(r) for r in self.orbit.rays],
        }


@dataclass(frozen=True)
class ChainCell:
    cell: Cell
    coefficient: tuple  # coordenadas em ∧^p N_σ na base e_I


@dataclass
class TropChain:
    p: int
    terms: dict = field(default_factory=dict)  # Cell -> tuple de coeficientes

    def add(self, cell, coefficient: Sequence) -> None:
        if isinstance(cell, Cone):
            cell = Cell.from_cone(cell)
        current = self.terms.get(cell)
        values = tuple(coefficient)
        if current is not None:
            values = tuple(a + b for a, b in zip(current, values))
        if any(v != 0 for v in values):
            self.terms[cell] = values
        else:
            self.terms.pop(cell, None)

    def coefficient(self, cell) -> Optional[tuple]:
        if isinstance(cell, Cone):
            cell = Cell.from_cone(cell)
        return self.terms.get(cell)

    def cells(self) -> list[ChainCell]:
        return [ChainCell(c, v) for c, v in self.terms.items()]

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(complex(v)) <= tol for values in self.terms.values() for v in values)

    def scale(self, factor) -> "TropChain":
        result = TropChain(self.p)
        for cell, values in self.terms.items():
            result.add(cell, [factor * v for v in values])
        return result

    def __add__(self, other: "TropChain") -> "TropChain":
        if other.p != self.p:
            raise DegreeError("cannot add chains of different degree")
        result = self.scale(1)
        for cell, values in other.terms.items():
            result.add(cell, values)
        return result

    def describe(self) -> list[dict]:
        return [
            {**cell.describe(), "coefficient": [str(v) for v in self.terms[cell]]}
            for cell in sorted(self.terms, key=_cell_sort_key)
        ]


def _cell_sort_key(cell: Cell):
    orbit_rays = () if cell.orbit is None else cell.orbit.rays
    return (len(orbit_rays), orbit_rays, cell.dim, tuple(str(v) for v in cell.vertices), cell.rays)


def chain_boundary(chain: TropChain, fan: Optional[Fan] = None) -> TropChain:
    """∂(v ⊗ γ): células de cone usam os sinais de build_complex, simplexos a regra usual"""
    result = TropChain(chain.p)
    for cell, values in chain.terms.items():
        if cell.dim == 0:
            continue
        if cell.is_cone:
            cone, order_sign = cell.as_cone()
            column = Matrix([Rational(v) if isinstance(v, int) else v for v in values])
            for face, sign in cell_incidences(cone, fan):
                transform = face_transform(cone, face, fan, chain.p)
                result.add(Cell.from_cone(face), [order_sign * sign * x for x in transform * column])
        elif not cell.rays:
            for i in range(len(cell.vertices)):
                face = Cell(cell.vertices[:i] + cell.vertices[i + 1:], (), cell.orbit)
                result.add(face, [(-1 if i % 2 else 1) * v for v in values])
        else:
            raise InvariantViolation("boundary of cells mixing vertices and rays is not supported",
                                     invariant="TropChain: cellular cells")
    return result
