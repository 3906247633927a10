"""
Módulo de Exceções

Este módulo define a hierarquia de erros do TropMap,
incluindo:
- Erros de leitura de documentos (código de saída 1)
- Violações de invariantes (código de saída 2)
- Falhas numéricas de convergência (código de saída 3)
"""

from typing import Any, Optional


class TropMapError(Exception):
    """Erro base do TropMap"""

    exit_code = 2

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details


class DocumentError(TropMapError):
    """Documento ausente, JSON inválido ou campos fora do esquema"""

    exit_code = 1

    def __init__(self, message: str, path: Optional[str] = None, **details: Any):
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message, **details)
        self.path = path


class InvariantViolation(TropMapError, ValueError):
    """Um invariante de tipo ou pré-condição foi violado"""

    exit_code = 2
    invariant = "invariant"

    def __init__(self, message: str, invariant: Optional[str] = None, **details: Any):
        super().__init__(message, **details)
        if invariant is not None:
            self.invariant = invariant


class DegreeError(InvariantViolation):
    invariant = "degree"


class DegenerateConeError(InvariantViolation):
    invariant = "Cone"


class SupportMismatchError(InvariantViolation):
    invariant = "support"


class FaceError(InvariantViolation):
    invariant = "face relation"


class UnbalancedCycleError(InvariantViolation):
    invariant = "WeightedCycle balancing"


class NonAdmissibleChartError(InvariantViolation):
    invariant = "admissibility"


class FaceMapUnavailableError(InvariantViolation):
    invariant = "product structure"


class MissingChartError(InvariantViolation):
    invariant = "Superform charts"


class OutsideNeighborhoodError(InvariantViolation):
    invariant = "declared neighborhood"


class ChartMismatchError(InvariantViolation):
    invariant = "chart family"


class NotClosedError(InvariantViolation):
    invariant = "closed chain"


class NumericalError(TropMapError):
    """Falha numérica: o resultado não pôde ser certificado"""

    exit_code = 3

    def __init__(self, message: str, estimate: Any = None, **details: Any):
        super().__init__(message, **details)
        self.estimate = estimate


class NonConvergenceError(NumericalError):
    pass


class DivergentIntegralError(NumericalError):
    pass


class SamplingFailure(NumericalError):
    pass
