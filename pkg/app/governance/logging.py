"""
Módulo de governança e observabilidade.
Implementa logging estruturado e rastreamento de execuções (run_id)
das induções e comandos do motor.
"""

import logging
import os
import uuid
from datetime import datetime
from typing import Any

LOGGER_NAME = "app"


class _RunIdFilter(logging.Filter):
    """Garante o campo run_id em registros emitidos fora de um RunContext."""

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, "run_id"):
            record.run_id = "-"
        return True


def setup_logging(level: int | str | None = None) -> logging.Logger:
    """
    Configura logging estruturado para o motor.

    Args:
        level: Nível de logging (padrão: ENGINE_LOG_LEVEL ou INFO)

    Returns:
        Logger configurado
    """
    if level is None:
        level = os.getenv("ENGINE_LOG_LEVEL", "INFO").upper()

    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)

    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setLevel(level)
        handler.addFilter(_RunIdFilter())
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - [%(run_id)s] - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger


class RunContext:
    """Contexto de uma execução para rastreamento."""

    def __init__(self, label: str | None = None):
        self.run_id = str(uuid.uuid4())
        self.label = label
        self.created_at = datetime.now()
        self.events: list[dict[str, Any]] = []
        self.logger = setup_logging()

    def log_event(
        self,
        event_type: str,
        message: str,
        metadata: dict[str, Any] | None = None,
        level: int = logging.INFO,
    ) -> None:
        """
        Registra um evento na execução.

        Args:
            event_type: Tipo do evento (ex: 'config', 'step', 'result')
            message: Mensagem do evento
            metadata: Metadados adicionais
            level: Nível de log
        """
        event = {
            "timestamp": datetime.now().isoformat(),
            "run_id": self.run_id,
            "event_type": event_type,
            "message": message,
            "metadata": metadata or {},
        }
        self.events.append(event)
        self.logger.log(level, message, extra={"run_id": self.run_id})

    def log_config(self, description: str, config: dict[str, Any]) -> None:
        """Registra a configuração da execução."""
        self.log_event("config", f"Configuração: {description}", config)

    def log_step(self, step: int, kind: str, metadata: dict[str, Any] | None = None) -> None:
        """Registra um passo temporal (nível DEBUG)."""
        self.log_event(
            "step",
            f"Passo {step} ({kind})",
            {"step": step, "kind": kind, **(metadata or {})},
            level=logging.DEBUG,
        )

    def log_warning(self, message: str, metadata: dict[str, Any] | None = None) -> None:
        """Registra um aviso não fatal."""
        self.log_event("warning", message, metadata, level=logging.WARNING)

    def log_result(self, message: str, metadata: dict[str, Any] | None = None) -> None:
        """Registra um resultado final."""
        self.log_event("result", message, metadata)

    def log_error(self, error: str, context: dict[str, Any] | None = None) -> None:
        """Registra um erro."""
        self.log_event(
            "error",
            f"Erro: {error}",
            {"error": error, "context": context or {}},
            level=logging.ERROR,
        )

    def get_events_summary(self) -> dict[str, Any]:
        """
        Retorna resumo dos eventos da execução.

        Returns:
            Dicionário com resumo
        """
        event_counts: dict[str, int] = {}
        for event in self.events:
            event_type = event["event_type"]
            event_counts[event_type] = event_counts.get(event_type, 0) + 1

        return {
            "run_id": self.run_id,
            "label": self.label,
            "total_events": len(self.events),
            "event_counts": event_counts,
            "duration_seconds": (datetime.now() - self.created_at).total_seconds(),
        }
