"""
Módulo Principal do TropMap

Este módulo gerencia a linha de comando do TropMap,
incluindo:
- Inicialização de configuração e logs
- Despacho dos verbos (homology, kgroup, trophyp, balance, wttrop, limit,
  logint, loglimit, expcone, refine, integrate, check)
- Relatórios JSON com versão, resumos das entradas e tempo opcional
- CSV das varreduras em ε
- Códigos de saída: 1 documento, 2 invariante, 3 falha numérica
"""

import argparse
import asyncio
import csv
import json
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from analytic import limit_integral, log_integral, rationality_check
from config import TOOLKIT_VERSION, ConfigManager
from cycles import check_balanced, trop_hypersurface, wtTrop_chain
from documents import (
    ChainDoc,
    CycleDoc,
    FanDoc,
    FormDoc,
    MonomialsDoc,
    PolynomialDoc,
    SemialgDoc,
    TropChainDoc,
    build_chain,
    build_cycle,
    build_fan,
    build_form,
    build_monomials,
    build_polynomial,
    build_semialg,
    build_tropchain,
    digest,
    load_document,
)
from exceptions import DocumentError, InvariantViolation, TropMapError
from log_manager import LogManager
from polyfan import common_refinement
from satrop import ExpBasicCone, in_exp_cone, log_limit_sample
from superform import integrate
from tropcoh import fan_homology, tropical_K_F0

DOCUMENT_KINDS = {
    "fan": (FanDoc, build_fan),
    "polynomial": (PolynomialDoc, build_polynomial),
    "cycle": (CycleDoc, build_cycle),
    "form": (FormDoc, build_form),
    "chain": (ChainDoc, build_chain),
    "tropchain": (TropChainDoc, build_tropchain),
    "monomials": (MonomialsDoc, build_monomials),
    "semialg": (SemialgDoc, build_semialg),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tropmap", description="Tropical geometry toolkit")
    parser.add_argument("--config", default="config.json", help="configuration file")
    parser.add_argument("--output", help="write the JSON report to this file")
    parser.add_argument("--threads", type=int, help="worker cap (fallback: TROPMAP_THREADS)")
    parser.add_argument("--timing", action="store_true", help="embed wall-clock timing in the report")
    verbs = parser.add_subparsers(dest="verb", required=True)

    sub = verbs.add_parser("homology", help="tropical (co)homology ranks of a fan")
    sub.add_argument("--fan", required=True)
    sub.add_argument("--p", type=int, required=True)

    sub = verbs.add_parser("kgroup", help="F^p(0, Λ) and its kernel J₀")
    sub.add_argument("--fan", required=True)
    sub.add_argument("--p", type=int, required=True)

    sub = verbs.add_parser("trophyp", help="tropical hypersurface of a Laurent polynomial")
    sub.add_argument("--poly", required=True)

    sub = verbs.add_parser("balance", help="balancing check of a weighted cycle")
    sub.add_argument("--cycle", required=True)

    sub = verbs.add_parser("wttrop", help="weighted tropicalization of a parametrized chain")
    sub.add_argument("--chain", required=True)
    sub.add_argument("--fan", required=True)

    sub = verbs.add_parser("limit", help="ε → 0 limit of ∫ -ε log|·|*(ω)")
    sub.add_argument("--chain", required=True)
    sub.add_argument("--form", required=True)
    sub.add_argument("--eps0", type=float)
    sub.add_argument("--ratio", type=float)
    sub.add_argument("--levels", type=int)
    sub.add_argument("--order", type=int)
    sub.add_argument("--csv", help="write (eps, value, error) rows to this file")

    sub = verbs.add_parser("logint", help="logarithmic integral over a parametrized chain")
    sub.add_argument("--chain", required=True)
    sub.add_argument("--monomials", required=True)

    sub = verbs.add_parser("loglimit", help="sampled logarithmic limit set")
    sub.add_argument("--set", required=True, dest="semialg")
    sub.add_argument("--radii", type=float, nargs="+", default=[8.0, 16.0, 32.0])
    sub.add_argument("--samples", type=int)
    sub.add_argument("--seed", type=int)

    sub = verbs.add_parser("expcone", help="membership in an exponential basic cone")
    sub.add_argument("--point", type=float, nargs="+", required=True)
    sub.add_argument("--N", type=float, nargs="*", default=[])
    sub.add_argument("--h", type=float, required=True)

    sub = verbs.add_parser("refine", help="common refinement of two fans")
    sub.add_argument("--fan", required=True)
    sub.add_argument("--other", required=True)

    sub = verbs.add_parser("integrate", help="∫ ω over a cellular tropical chain")
    sub.add_argument("--tropchain", required=True)
    sub.add_argument("--form", required=True)

    sub = verbs.add_parser("check", help="validate any input document")
    sub.add_argument("--document", required=True)
    return parser


class TropMapApp:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = ConfigManager(args.config)
        self.log_manager: Optional[LogManager] = None
        self.inputs: Dict[str, str] = {}
        self.handlers: Dict[str, Callable] = {
            "homology": self._homology,
            "kgroup": self._kgroup,
            "trophyp": self._trophyp,
            "balance": self._balance,
            "wttrop": self._wttrop,
            "limit": self._limit,
            "logint": self._logint,
            "loglimit": self._loglimit,
            "expcone": self._expcone,
            "refine": self._refine,
            "integrate": self._integrate,
            "check": self._check,
        }

    async def initialize(self) -> None:
        """Inicializa configuração e logs"""
        self.log_manager = LogManager(self.config)
        self.config.validate_config()
        self.threads = self.config.threads(self.args.threads)
        self.log_manager.debug("main", f"TropMap {TOOLKIT_VERSION} ({self.args.verb}, {self.threads} threads)")

    def _load(self, path: str, model, builder):
        self.inputs[path] = digest(path)
        return builder(load_document(path, model))

    async def run(self) -> int:
        """Executa o verbo pedido e escreve o relatório; devolve o código de saída"""
        try:
            await self.initialize()
            started = time.perf_counter()
            result = await self.handlers[self.args.verb]()
            elapsed = time.perf_counter() - started
            self.log_manager.info("main", f"{self.args.verb} finished in {elapsed:.3f}s")
            report: Dict[str, Any] = {
                "verb": self.args.verb,
                "version": TOOLKIT_VERSION,
                "inputs": dict(sorted(self.inputs.items())),
                "result": result,
            }
            if self.args.timing or self.config.get("system.report_timing", False):
                report["timing"] = {"seconds": round(elapsed, 6)}
            self._write_report(report)
            return 0
        except TropMapError as e:
            return self._fail(e, e.exit_code)
        except ValueError as e:
            return self._fail(e, 2)
        finally:
            if self.log_manager:
                self.log_manager.close()

    def _fail(self, error: Exception, code: int) -> int:
        message = str(error)
        if isinstance(error, InvariantViolation):
            message = f"{error.invariant}: {message}"
        print(f"error: {message}", file=sys.stderr)
        if self.log_manager:
            self.log_manager.error("main", message)
        return code

    def _write_report(self, report: Dict[str, Any]) -> None:
        text = json.dumps(report, sort_keys=True, indent=2, default=str) + "\n"
        if self.args.output:
            try:
                Path(self.args.output).write_text(text, encoding="utf-8")
            except OSError as e:
                raise DocumentError(f"cannot write report ({e.strerror})", path=self.args.output) from None
        else:
            sys.stdout.write(text)

    async def _homology(self) -> dict:
        fan = self._load(self.args.fan, FanDoc, build_fan)
        result = fan_homology(fan, self.args.p, threads=self.threads)
        payload = result.to_dict()
        payload["ranks"] = {f"({result.p},{q})": r for q, r in sorted(result.homology.items())}
        return payload

    async def _kgroup(self) -> dict:
        fan = self._load(self.args.fan, FanDoc, build_fan)
        return tropical_K_F0(fan, self.args.p).to_dict()

    async def _trophyp(self) -> dict:
        f = self._load(self.args.poly, PolynomialDoc, build_polynomial)
        cycle = trop_hypersurface(f)
        return {"cycle": cycle.describe(), "balance": cycle.verdict.to_dict() if cycle.verdict else None}

    async def _balance(self) -> dict:
        cycle = self._load(self.args.cycle, CycleDoc, build_cycle)
        return check_balanced(cycle).to_dict()

    async def _wttrop(self) -> dict:
        chain = self._load(self.args.chain, ChainDoc, build_chain)
        fan = self._load(self.args.fan, FanDoc, build_fan)
        result = wtTrop_chain(chain, fan, chain.dim, self.config.quadrature(), threads=self.threads)
        return {"r": result.r, "chains": result.describe()}

    async def _limit(self) -> dict:
        chain = self._load(self.args.chain, ChainDoc, build_chain)
        form = self._load(self.args.form, FormDoc, build_form)
        schedule = self.config.eps_schedule(eps0=self.args.eps0, ratio=self.args.ratio,
                                            levels=self.args.levels, order=self.args.order)
        result = limit_integral(chain, form, schedule, self.config.quadrature(), threads=self.threads)
        if self.args.csv:
            self._write_csv(self.args.csv, result.rows())
        return result.to_dict()

    def _write_csv(self, path: str, rows: List[tuple]) -> None:
        try:
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f)
                writer.writerow(["eps", "value_real", "value_imag", "error"])
                for eps, value, error in rows:
                    writer.writerow([repr(eps), repr(value.real), repr(value.imag), repr(error)])
        except OSError as e:
            raise DocumentError(f"cannot write CSV ({e.strerror})", path=path) from None

    async def _logint(self) -> dict:
        chain = self._load(self.args.chain, ChainDoc, build_chain)
        monomials = self._load(self.args.monomials, MonomialsDoc, build_monomials)
        cfg = self.config.quadrature()
        if chain.is_closed():
            max_den = self.config.get("system.rational_max_den", 100)
            return rationality_check(chain, monomials, cfg, max_den=max_den).to_dict()
        result = log_integral(chain, monomials, cfg, threads=self.threads)
        return {"value": [result.value.real, result.value.imag], "error": result.error, "rational": None}

    async def _loglimit(self) -> dict:
        s = self._load(self.args.semialg, SemialgDoc, build_semialg)
        cloud = log_limit_sample(s, self.args.radii, self.args.samples, self.args.seed,
                                 self.config.sampling(), threads=self.threads)
        return cloud.to_dict()

    async def _expcone(self) -> dict:
        cone = ExpBasicCone(tuple(self.args.N), self.args.h)
        return {"member": in_exp_cone(self.args.point, cone)}

    async def _refine(self) -> dict:
        first = self._load(self.args.fan, FanDoc, build_fan)
        second = self._load(self.args.other, FanDoc, build_fan)
        refined = common_refinement(first, second)
        rays = sorted({r for c in refined.cones for r in c.rays})
        payload = refined.describe()
        payload["ray_count"] = len(rays)
        payload["maximal_cone_count"] = len(refined.maximal_cones)
        return payload

    async def _integrate(self) -> dict:
        chain = self._load(self.args.tropchain, TropChainDoc, build_tropchain)
        form = self._load(self.args.form, FormDoc, build_form)
        return integrate(chain, form, self.config.quadrature(), threads=self.threads).to_dict()

    async def _check(self) -> dict:
        path = self.args.document
        try:
            kind = json.loads(Path(path).read_text(encoding="utf-8")).get("kind")
        except OSError as e:
            raise DocumentError(f"cannot read file ({e.strerror})", path=path) from None
        except (json.JSONDecodeError, AttributeError):
            raise DocumentError("not a JSON object", path=path) from None
        if kind not in DOCUMENT_KINDS:
            raise DocumentError(f"unknown document kind {kind!r}", path=path)
        model, builder = DOCUMENT_KINDS[kind]
        self._load(path, model, builder)
        return {"kind": kind, "valid": True}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    app = TropMapApp(args)
    return asyncio.run(app.run())


if __name__ == "__main__":
    sys.exit(main())
