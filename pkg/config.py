"""
Módulo de Gerenciamento de Configurações

Este módulo gerencia todas as configurações do TropMap,
incluindo:
- Agenda de ε para os limites -ε log|·|
- Configurações de quadratura
- Configurações de amostragem (conjuntos de limite logarítmico)
- Verificação da condição de fronteira das superformas
- Configurações de sistema (logs, threads, relatório)
"""

import os
import json
from pathlib import Path
from typing import Dict, Any, Optional
from dataclasses import dataclass, asdict

from dotenv import load_dotenv

from exceptions import InvariantViolation

TOOLKIT_VERSION = "0.3.0"

THREADS_ENV = "TROPMAP_THREADS"


@dataclass
class EpsSchedule:
    eps0: float = 0.2
    ratio: float = 0.5
    levels: int = 7
    order: int = 2  # ordem máxima da extrapolação de Richardson
    floor: float = 1e-12  # piso de precisão de máquina

    def __post_init__(self):
        if self.eps0 <= 0:
            raise ValueError("eps0 must be positive")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.levels < 1:
            raise ValueError("levels must be at least 1")
        if self.order < 0:
            raise ValueError("order must be non-negative")
        if self.eps0 * self.ratio ** self.levels <= self.floor:
            raise InvariantViolation(
                f"eps0*ratio**levels = {self.eps0 * self.ratio ** self.levels:.3e} "
                f"is below the precision floor {self.floor:.1e}",
                invariant="EpsSchedule: eps0*ratio**levels > floor",
            )

    def epsilons(self) -> list[float]:
        """Valores de ε do mais grosso ao mais fino"""
        return [self.eps0 * self.ratio ** k for k in range(self.levels)]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class QuadratureCfg:
    rule: str = "gauss"  # gauss, montecarlo
    order: int = 16
    max_depth: int = 12
    max_boxes: int = 20000
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    mc_samples: int = 1_000_000
    seed: int = 12345
    magnitude_budget: float = 1e8  # guarda de convergência absoluta
    radial_cutoff: float = 60.0  # truncamento de parâmetros radiais infinitos

    def __post_init__(self):
        # Validate rule
        if self.rule not in ["gauss", "montecarlo"]:
            raise ValueError("rule must be one of: gauss, montecarlo")
        if self.order < 2:
            raise InvariantViolation("quadrature order must be >= 2",
                                     invariant="QuadratureCfg: order >= 2")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise InvariantViolation("quadrature tolerances must be positive",
                                     invariant="QuadratureCfg: tolerance > 0")
        if self.max_depth < 0 or self.max_boxes < 1:
            raise ValueError("max_depth must be >= 0 and max_boxes >= 1")
        if self.mc_samples < 2:
            raise ValueError("mc_samples must be at least 2")

    def tolerance(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class SamplingConfig:
    samples: int = 400
    seed: int = 2024
    cluster_tol: float = 0.05  # raio angular dos agrupamentos
    max_attempts: int = 20
    residual_tol: float = 1e-9
    denominator_bound: int = 1_000_000  # aproximação racional de direções irracionais

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.cluster_tol <= 0:
            raise ValueError("cluster_tol must be positive")


@dataclass
class BoundaryCheckConfig:
    samples: int = 1000
    tol: float = 1e-9
    collar: float = 8.0  # distância mínima rumo ao infinito
    width: float = 8.0  # largura da faixa amostrada

    def __post_init__(self):
        if self.samples < 1 or self.tol <= 0:
            raise ValueError("samples and tol must be positive")


@dataclass
class SystemConfig:
    log_level: str = "INFO"
    log_file: str = "tropmap.log"
    max_log_size: int = 10485760  # 10MB
    max_log_files: int = 10
    threads: int = 1
    report_timing: bool = False
    rational_max_den: int = 100


class ConfigManager:
    def __init__(self, config_file: str = "config.json"):
        self.config_file = Path(config_file)
        self.config: Dict[str, Any] = {}
        self.default_config = {
            "schedule": EpsSchedule().to_dict(),
            "quadrature": QuadratureCfg().to_dict(),
            "sampling": SamplingConfig().__dict__,
            "boundary_check": BoundaryCheckConfig().__dict__,
            "system": SystemConfig().__dict__,
            "logging": {
                "enabled_modules": {
                    "main": True,
                    "polyfan": True,
                    "tropcoh": True,
                    "cycles": True,
                    "superform": True,
                    "analytic": True,
                    "satrop": True,
                    "quadrature": True,
                    "config": True
                },
                "default_level": "INFO"
            }
        }

        load_dotenv()
        self.load_config()

    def get_module_logging(self, module_name: str) -> bool:
        """Verifica se logging está ativado para um módulo específico"""
        return self.get(f"logging.enabled_modules.{module_name}", True)

    def set_module_logging(self, module_name: str, enabled: bool) -> None:
        """Ativa/desativa logging para um módulo específico"""
        self.set(f"logging.enabled_modules.{module_name}", enabled)

    def load_config(self) -> None:
        """Carrega configurações do arquivo ou usa padrões"""
        try:
            if self.config_file.exists():
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    loaded = json.load(f)
                self.config = _merge(self.default_config, loaded)
            else:
                self.config = json.loads(json.dumps(self.default_config))
        except (OSError, json.JSONDecodeError) as e:
            print(f"Erro ao carregar configurações: {e}")
            self.config = json.loads(json.dumps(self.default_config))

    def save_config(self) -> None:
        """Salva configurações no arquivo"""
        try:
            self.config_file.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=4)
        except OSError as e:
            print(f"Erro ao salvar configurações: {e}")

    def get(self, key: str, default: Optional[Any] = None) -> Any:
        """Obtém valor de configuração"""
        keys = key.split('.')
        value = self.config

        try:
            for k in keys:
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def set(self, key: str, value: Any, persist: bool = False) -> None:
        """Define valor de configuração"""
        keys = key.split('.')
        current = self.config

        for k in keys[:-1]:
            if k not in current:
                current[k] = {}
            current = current[k]

        current[keys[-1]] = value
        if persist:
            self.save_config()

    def eps_schedule(self, **overrides: Any) -> EpsSchedule:
        """Constrói a agenda de ε a partir da configuração"""
        return EpsSchedule(**_section(self.get("schedule", {}), overrides))

    def quadrature(self, **overrides: Any) -> QuadratureCfg:
        return QuadratureCfg(**_section(self.get("quadrature", {}), overrides))

    def sampling(self, **overrides: Any) -> SamplingConfig:
        return SamplingConfig(**_section(self.get("sampling", {}), overrides))

    def boundary_check(self, **overrides: Any) -> BoundaryCheckConfig:
        return BoundaryCheckConfig(**_section(self.get("boundary_check", {}), overrides))

    def threads(self, override: Optional[int] = None) -> int:
        """Número de workers: --threads, depois TROPMAP_THREADS, depois config"""
        if override is not None:
            value = override
        elif os.getenv(THREADS_ENV):
            try:
                value = int(os.environ[THREADS_ENV])
            except ValueError:
                raise ValueError(f"{THREADS_ENV} must be an integer")
        else:
            value = self.get("system.threads", 1)
        if value < 1:
            raise ValueError("threads must be at least 1")
        return value

    def validate_config(self) -> bool:
        """Valida as configurações atuais construindo cada seção"""
        self.eps_schedule()
        self.quadrature()
        self.sampling()
        self.boundary_check()
        return True

    def __getitem__(self, key: str) -> Any:
        return self.get(key)

    def __setitem__(self, key: str, value: Any) -> None:
        self.set(key, value)

    def __contains__(self, key: str) -> bool:
        return self.get(key, _MISSING) is not _MISSING


_MISSING = object()


def _section(values: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged


def _merge(defaults: Dict[str, Any], loaded: Dict[str, Any]) -> Dict[str, Any]:
    result = json.loads(json.dumps(defaults))
    for key, value in loaded.items():
        if isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = _merge(result[key], value)
        else:
            result[key] = value
    return result
