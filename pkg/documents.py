"""
Módulo de Documentos

Este módulo gerencia os documentos JSON de entrada do TropMap,
incluindo:
- Esquemas pydantic para leques, polinômios, ciclos, formas, cadeias e conjuntos
- Leitura com erros de esquema convertidos em DocumentError (código de saída 1)
- Resumos sha256 das entradas para rastreabilidade dos relatórios
- Construção dos objetos de domínio a partir dos documentos validados
"""

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Literal, Optional, Type, TypeVar, Union

from pydantic import BaseModel, Field, ValidationError

from analytic import Chart, Param, ParamChain, ProductStructure, parse_chart_expression
from cycles import Polynomial, WeightedCycle, check_balanced
from exceptions import DocumentError
from polyfan import Cone, Fan, compactify
from satrop import Constraint, SemialgSet
from superform import Bump, CoefProfile, FormChart, Superform
from tropcoh import Cell, TropChain

Number = Union[int, float, str]
Bound = Union[int, float, str, list]

M = TypeVar("M", bound=BaseModel)


class FanDoc(BaseModel):
    kind: Literal["fan"] = "fan"
    name: str = ""
    lattice_rank: int = Field(ge=0)
    rays: List[List[int]] = []
    cones: List[List[int]] = []
    ambient: Optional["FanDoc"] = None


class PolynomialDoc(BaseModel):
    kind: Literal["polynomial"] = "polynomial"
    n: int = Field(ge=1)
    terms: List[List[Any]]


class CycleDoc(BaseModel):
    kind: Literal["cycle"] = "cycle"
    lattice_rank: int = Field(ge=1)
    rays: List[List[int]]
    cones: List[List[int]]
    weights: List[Number]


class BumpDoc(BaseModel):
    coord: int = Field(ge=0)
    center: float
    radius: float = Field(gt=0)


class FormTermDoc(BaseModel):
    sigma: List[List[int]] = []
    I: List[int] = []
    J: List[int] = []
    poly: List[List[Any]] = [[1, None]]
    bumps: List[BumpDoc] = []


class FormChartDoc(BaseModel):
    sigma: List[List[int]] = []
    box: Optional[List[List[Bound]]] = None


class FormDoc(BaseModel):
    kind: Literal["form"] = "form"
    n: int = Field(ge=1)
    p: int = Field(ge=0)
    q: int = Field(ge=0)
    charts: List[FormChartDoc] = []
    terms: List[FormTermDoc] = []


class ParamDoc(BaseModel):
    name: str
    lo: Bound
    hi: Bound
    radial: bool = False
    periodic: bool = False


class ProductDoc(BaseModel):
    ray: List[int]
    radial: str
    angle: Optional[str] = None
    approach: Literal["+inf", "-inf"] = "+inf"


class ChartDoc(BaseModel):
    name: str = ""
    params: List[ParamDoc] = []
    map: List[Any]
    orientation: Literal[1, -1] = 1
    multiplicity: Number = 1
    products: List[ProductDoc] = []


class ChainDoc(BaseModel):
    kind: Literal["chain"] = "chain"
    name: str = ""
    n: int = Field(ge=1)
    charts: List[ChartDoc]
    boundary: List[ChartDoc] = []


class CellDoc(BaseModel):
    vertices: List[List[Number]] = []
    rays: List[List[int]] = []
    orbit: List[List[int]] = []
    coefficient: List[Number]


class TropChainDoc(BaseModel):
    kind: Literal["tropchain"] = "tropchain"
    n: int = Field(ge=1)
    p: int = Field(ge=0)
    cells: List[CellDoc]


class MonomialsDoc(BaseModel):
    kind: Literal["monomials"] = "monomials"
    monomials: List[List[int]]


class ConstraintDoc(BaseModel):
    terms: List[List[Any]]
    relation: Literal[">=", ">", "="] = ">="


class SemialgDoc(BaseModel):
    kind: Literal["semialg"] = "semialg"
    n: int = Field(ge=1)
    m: int = Field(default=0, ge=0)
    constraints: List[ConstraintDoc] = []
    witness: Optional[List[float]] = None


FanDoc.model_rebuild()


def digest(path: Union[str, Path]) -> str:
    """Resumo sha256 do arquivo de entrada"""
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as e:
        raise DocumentError(f"cannot read file ({e.strerror})", path=str(path)) from None


def load_document(path: Union[str, Path], model: Type[M]) -> M:
    """Lê e valida um documento JSON"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise DocumentError(f"cannot read file ({e.strerror})", path=str(path)) from None
    except json.JSONDecodeError as e:
        raise DocumentError(f"invalid JSON at line {e.lineno}: {e.msg}", path=str(path)) from None
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(x) for x in first["loc"])
        raise DocumentError(f"{location}: {first['msg']}", path=str(path)) from None


def _number(value: Any) -> Any:
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10 ** 12) if value == int(value) else value
    return value


def _bound(value: Bound) -> float:
    if isinstance(value, str) and value.strip() in ("inf", "+inf", "-inf"):
        return float(value)
    if isinstance(value, (int, float)):
        return float(value)
    return float(parse_chart_expression(value))


def _terms(n: int, raw: List[List[Any]]) -> list:
    terms = []
    for entry in raw:
        if len(entry) != 2:
            raise DocumentError(f"term {entry!r} must be [coefficient, exponent]")
        terms.append((_number(entry[0]), tuple(entry[1])))
    return terms


def build_fan(doc: FanDoc) -> Fan:
    ambient = build_fan(doc.ambient) if doc.ambient is not None else None
    fan = Fan.from_maximal(doc.lattice_rank, doc.rays, doc.cones, name=doc.name)
    return compactify(fan, ambient) if ambient is not None else fan


def build_polynomial(doc: PolynomialDoc) -> Polynomial:
    return Polynomial.from_terms(doc.n, _terms(doc.n, doc.terms))


def build_cycle(doc: CycleDoc) -> WeightedCycle:
    if len(doc.weights) != len(doc.cones):
        raise DocumentError("weights and cones must have the same length")
    fan = Fan.from_maximal(doc.lattice_rank, doc.rays, doc.cones)
    weights = {}
    for indices, weight in zip(doc.cones, doc.weights):
        cone = Cone.from_generators([doc.rays[i] for i in indices], doc.lattice_rank)
        weights[cone] = _number(weight)
    cycle = WeightedCycle(fan, weights)
    cycle.verdict = check_balanced(cycle)
    return cycle


def _sigma(rays: List[List[int]], n: int) -> Optional[Cone]:
    return Cone.from_generators(rays, n) if rays else None


def build_form(doc: FormDoc) -> Superform:
    charts = {}
    for chart in doc.charts:
        sigma = _sigma(chart.sigma, doc.n)
        k = doc.n - (0 if sigma is None else sigma.dim)
        box = chart.box or [["-inf", "inf"]] * k
        if len(box) != k:
            raise DocumentError(f"chart box has {len(box)} intervals for a chart of dimension {k}")
        charts[sigma] = FormChart(sigma, tuple((_bound(lo), _bound(hi)) for lo, hi in box))
    form = Superform(doc.n, doc.p, doc.q, charts)
    for term in doc.terms:
        sigma = _sigma(term.sigma, doc.n)
        k = form.chart_dim(sigma)
        poly = [(_number(c), tuple(e) if e is not None else None) for c, e in term.poly]
        bumps = [Bump(b.coord, b.center, b.radius) for b in term.bumps]
        form.add_term(sigma, term.I, term.J, CoefProfile.from_parts(k, poly, bumps))
    return form


def _chart(doc: ChartDoc) -> Chart:
    params = [Param(p.name, _bound(p.lo), _bound(p.hi), p.radial, p.periodic) for p in doc.params]
    products = tuple(ProductStructure(tuple(s.ray), s.radial, s.angle, s.approach) for s in doc.products)
    return Chart.from_trees(params, doc.map, orientation=doc.orientation,
                            multiplicity=Fraction(doc.multiplicity), products=products, name=doc.name)


def build_chain(doc: ChainDoc) -> ParamChain:
    return ParamChain(doc.n, [_chart(c) for c in doc.charts], [_chart(c) for c in doc.boundary], name=doc.name)


def build_tropchain(doc: TropChainDoc) -> TropChain:
    chain = TropChain(doc.p)
    for cell in doc.cells:
        orbit = _sigma(cell.orbit, doc.n)
        k = doc.n - (0 if orbit is None else orbit.dim)
        vertices = tuple(tuple(_number(x) for x in v) for v in cell.vertices) or ((0,) * k,)
        chain.add(Cell(vertices, tuple(tuple(r) for r in cell.rays), orbit),
                  [_number(x) for x in cell.coefficient])
    return chain


def build_monomials(doc: MonomialsDoc) -> list:
    return [tuple(m) for m in doc.monomials]


def build_semialg(doc: SemialgDoc) -> SemialgSet:
    constraints = tuple(
        Constraint(Polynomial.from_terms(doc.n + doc.m, _terms(doc.n + doc.m, c.terms)), c.relation)
        for c in doc.constraints)
    witness = tuple(doc.witness) if doc.witness is not None else None
    return SemialgSet(doc.n, doc.m, constraints, witness)
