import sys
from typing import Any, Optional

from loguru import logger

_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} - {extra[module]} - {level} - {message}"


class LogManager:
    def __init__(self, config: Optional[Any] = None):
        """Inicializa o gerenciador de logs"""
        self.config = config
        self.loggers = {}
        self._sink_ids: list[int] = []
        self._setup_logging()

    def _get(self, key: str, default: Any) -> Any:
        if self.config is None:
            return default
        if hasattr(self.config, "get"):
            return self.config.get(key, default)
        return default

    def _setup_logging(self):
        """Configura os sinks do loguru"""
        level = self._get("system.log_level", "INFO")
        log_file = self._get("system.log_file", None)
        logger.remove()
        self._sink_ids.append(
            logger.add(sys.stderr, level=level, format=_FORMAT, filter=self._enabled)
        )
        if log_file:
            self._sink_ids.append(logger.add(
                log_file,
                level="DEBUG",
                format=_FORMAT,
                rotation=self._get("system.max_log_size", 10485760),
                retention=self._get("system.max_log_files", 10),
                filter=self._enabled,
            ))

    def _enabled(self, record) -> bool:
        module = record["extra"].get("module")
        if module is None:
            record["extra"]["module"] = record["name"]
            return True
        if self.config is not None and hasattr(self.config, "get_module_logging"):
            return bool(self.config.get_module_logging(module))
        return True

    def get_logger(self, name: str):
        """Obtém ou cria um logger com o nome especificado

        Args:
            name: Nome do logger (módulo)

        Returns:
            Logger do loguru vinculado ao módulo
        """
        if name not in self.loggers:
            self.loggers[name] = logger.bind(module=name)
        return self.loggers[name]

    def error(self, logger_name: str, message: str) -> None:
        self.get_logger(logger_name).error(message)

    def warning(self, logger_name: str, message: str) -> None:
        self.get_logger(logger_name).warning(message)

    def info(self, logger_name: str, message: str) -> None:
        self.get_logger(logger_name).info(message)

    def debug(self, logger_name: str, message: str) -> None:
        self.get_logger(logger_name).debug(message)

    def close(self) -> None:
        """Remove os sinks registrados por esta instância"""
        for sink_id in self._sink_ids:
            try:
                logger.remove(sink_id)
            except ValueError:
                pass
        self._sink_ids.clear()
