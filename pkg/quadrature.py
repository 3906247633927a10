"""
Módulo de Quadratura

Este módulo concentra a integração numérica usada pelo TropMap,
incluindo:
- Regras tensoriais de Gauss-Legendre em caixas
- Subdivisão adaptativa global (bissecção diádica) com orçamento de caixas
- Mapa de colapso do cubo no simplexo
- Monte Carlo com semente fixa para verificação cruzada
- Tabela de extrapolação de Richardson
"""

import heapq
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np
from loguru import logger

from config import QuadratureCfg
from exceptions import NonConvergenceError

log = logger.bind(module="quadrature")

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass
class QuadResult:
    value: complex
    error: float
    evaluations: int = 0
    boxes: int = 0

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(self.value + other.value, self.error + other.error,
                          self.evaluations + other.evaluations, self.boxes + other.boxes)


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nós e pesos de Gauss-Legendre em [-1, 1]"""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def tensor_rule(lo: Sequence[float], hi: Sequence[float], order: int) -> tuple[np.ndarray, np.ndarray]:
    """Pontos (N, d) e pesos (N,) da regra produto na caixa [lo, hi]"""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    if d == 0:
        return np.zeros((1, 0)), np.ones(1)
    nodes, weights = gauss_legendre(order)
    half = (hi - lo) / 2.0
    mid = (hi + lo) / 2.0
    grids = np.meshgrid(*([nodes] * d), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1) * half + mid
    wgrids = np.meshgrid(*([weights] * d), indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1) * np.prod(half)
    return points, w


def pairwise_sum(values: Sequence[complex]) -> complex:
    """Soma em ordem fixa (np.sum usa soma par a par)"""
    array = np.asarray(list(values), dtype=complex)
    if array.size == 0:
        return 0j
    return complex(np.sum(array))


def _box_estimate(f: Integrand, lo: np.ndarray, hi: np.ndarray, order: int) -> complex:
    points, weights = tensor_rule(lo, hi, order)
    values = np.asarray(f(points), dtype=complex)
    return complex(np.sum(values * weights))


def _children(lo: np.ndarray, hi: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    mid = (lo + hi) / 2.0
    result = []
    for corner in product((0, 1), repeat=lo.size):
        c = np.array(corner, dtype=bool)
        result.append((np.where(c, mid, lo), np.where(c, hi, mid)))
    return result


@dataclass(order=True)
class _Box:
    priority: float
    counter: int
    lo: np.ndarray = field(compare=False)
    hi: np.ndarray = field(compare=False)
    value: complex = field(compare=False)
    error: float = field(compare=False)
    depth: int = field(compare=False)


def integrate_box(f: Integrand, lo: Sequence[float], hi: Sequence[float], cfg: QuadratureCfg,
                  splits: Optional[Sequence[int]] = None) -> QuadResult:
    """Integração adaptativa global de f sobre a caixa [lo, hi]

    Args:
        f: Integrando vetorizado, pontos (N, d) -> valores (N,)
        lo, hi: Limites da caixa
        cfg: Configuração de quadratura (ordem, profundidade, orçamento, tolerâncias)
        splits: Subdivisão uniforme inicial por coordenada

    Returns:
        QuadResult com valor, estimativa de erro e contadores
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size == 0:
        value = complex(np.asarray(f(np.zeros((1, 0))), dtype=complex)[0])
        return QuadResult(value, 0.0, 1, 1)
    if np.any(hi < lo):
        raise ValueError("box with hi < lo")
    if np.any(hi == lo):
        return QuadResult(0j, 0.0, 0, 0)
    splits = list(splits) if splits is not None else [1] * lo.size
    counter = 0
    evaluations = 0
    heap: list[_Box] = []
    edges = [np.linspace(a, b, k + 1) for a, b, k in zip(lo, hi, splits)]
    for index in product(*[range(k) for k in splits]):
        box_lo = np.array([edges[i][j] for i, j in enumerate(index)])
        box_hi = np.array([edges[i][j + 1] for i, j in enumerate(index)])
        coarse = _box_estimate(f, box_lo, box_hi, cfg.order)
        fine = [_box_estimate(f, a, b, cfg.order) for a, b in _children(box_lo, box_hi)]
        evaluations += (1 + len(fine)) * cfg.order ** lo.size
        value = pairwise_sum(fine)
        error = abs(value - coarse)
        heapq.heappush(heap, _Box(-error, counter, box_lo, box_hi, value, error, 0))
        counter += 1
    running_value = pairwise_sum(b.value for b in heap)
    running_error = float(sum(b.error for b in heap))
    while True:
        if running_error <= cfg.tolerance(abs(running_value)):
            total = pairwise_sum(b.value for b in sorted(heap, key=lambda b: b.counter))
            return QuadResult(total, running_error, evaluations, len(heap))
        worst = heapq.heappop(heap)
        error = running_error
        total = running_value
        if worst.depth >= cfg.max_depth or len(heap) + 2 ** lo.size > cfg.max_boxes:
            heapq.heappush(heap, worst)
            raise NonConvergenceError(
                f"adaptive quadrature did not reach tolerance (error {error:.3e})",
                estimate=total, error=error, boxes=len(heap),
            )
        running_value -= worst.value
        running_error -= worst.error
        for a, b in _children(worst.lo, worst.hi):
            coarse = _box_estimate(f, a, b, cfg.order)
            fine = [_box_estimate(f, c, d, cfg.order) for c, d in _children(a, b)]
            evaluations += (1 + len(fine)) * cfg.order ** lo.size
            value = pairwise_sum(fine)
            child_error = abs(value - coarse)
            heapq.heappush(heap, _Box(-child_error, counter, a, b, value, child_error, worst.depth + 1))
            counter += 1
            running_value += value
            running_error += child_error


def simplex_map(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Colapso [0,1]^d → {t ≥ 0, Σt ≤ 1}; devolve pontos e jacobiano"""
    u = np.atleast_2d(u)
    d = u.shape[1]
    t = np.empty_like(u)
    remaining = np.ones(u.shape[0])
    jacobian = np.ones(u.shape[0])
    for k in range(d):
        t[:, k] = remaining * u[:, k]
        jacobian *= remaining
        remaining = remaining * (1.0 - u[:, k])
    return t, jacobian


def integrate_simplex_box(f: Integrand, simplex_dim: int, lo: Sequence[float], hi: Sequence[float],
                          cfg: QuadratureCfg) -> QuadResult:
    """∫ f(t, s) sobre simplexo padrão de dimensão simplex_dim × caixa [lo, hi]"""

    def collapsed(points: np.ndarray) -> np.ndarray:
        t, jacobian = simplex_map(points[:, :simplex_dim]) if simplex_dim else (points[:, :0], 1.0)
        return np.asarray(f(np.hstack([t, points[:, simplex_dim:]])), dtype=complex) * jacobian

    box_lo = [0.0] * simplex_dim + list(lo)
    box_hi = [1.0] * simplex_dim + list(hi)
    return integrate_box(collapsed, box_lo, box_hi, cfg)


def monte_carlo_box(f: Integrand, lo: Sequence[float], hi: Sequence[float], samples: int, seed: int,
                    batch: int = 100_000) -> QuadResult:
    """Estimativa de Monte Carlo com semente fixa; erro = desvio padrão da média"""
    rng = np.random.default_rng(seed)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    volume = float(np.prod(hi - lo))
    total, total_sq, count = 0j, 0.0, 0
    while count < samples:
        size = min(batch, samples - count)
        points = lo + (hi - lo) * rng.random((size, lo.size))
        values = np.asarray(f(points), dtype=complex)
        total += np.sum(values)
        total_sq += float(np.sum(np.abs(values) ** 2))
        count += size
    mean = total / count
    variance = max(total_sq / count - abs(mean) ** 2, 0.0)
    return QuadResult(volume * mean, volume * float(np.sqrt(variance / count)), count, 0)


@dataclass
class RichardsonTable:
    epsilons: list
    values: list
    table: list  # table[k][j]
    order: int

    @property
    def best(self) -> complex:
        return self.table[-1][min(self.order, len(self.table) - 1)]

    @property
    def error(self) -> float:
        if len(self.table) < 2:
            return float("inf")
        j = min(self.order, len(self.table) - 1)
        previous = self.table[-2][min(j, len(self.table[-2]) - 1)]
        return float(abs(self.best - previous))

    def estimated_order(self) -> Optional[float]:
        """Ordem observada a partir dos três últimos níveis (None se as diferenças se anulam)"""
        if len(self.values) < 3:
            return None
        d1 = abs(self.values[-2] - self.values[-3])
        d2 = abs(self.values[-1] - self.values[-2])
        ratio = self.epsilons[-2] / self.epsilons[-1]
        if d1 == 0 or d2 == 0:
            return None
        return float(np.log(d1 / d2) / np.log(ratio))

    def slope(self) -> float:
        if len(self.values) < 2:
            return 0.0
        return float(abs(self.values[-1] - self.values[-2]) / abs(self.epsilons[-2] - self.epsilons[-1]))


def richardson(epsilons: Sequence[float], values: Sequence[complex], order: int) -> RichardsonTable:
    """R[k][j] = (t^j R[k][j-1] - R[k-1][j-1]) / (t^j - 1), t = ε_{k-1}/ε_k"""
    table = []
    for k, value in enumerate(values):
        row = [complex(value)]
        for j in range(1, min(order, k) + 1):
            t = (epsilons[k - 1] / epsilons[k]) ** j
            row.append((t * row[j - 1] - table[k - 1][j - 1]) / (t - 1.0))
        table.append(row)
    return RichardsonTable(list(epsilons), [complex(v) for v in values], table, order)
