"""Logging for the simulator: structlog when installed, stdlib logging otherwise.

Both paths accept the same call shape, ``logger.info("event_name", key=value)``,
and write to stderr so command output on stdout stays clean.
"""

import logging
import logging.config
import sys
from typing import Any, Dict, Iterable, List

try:
    import structlog
except ImportError:  # structlog not installed
    structlog = None  # type: ignore[assignment]

from ..config.settings import settings

STRUCTLOG_AVAILABLE = structlog is not None

# quieter than the root logger at INFO: one line per mined block adds up
CHATTY_LOGGERS = ("blockpki.ledger",)


class _StdLoggerAdapter:
    """Keyword-argument facade over a ``logging.Logger``."""

    def __init__(self, logger: logging.Logger):
        self._logger = logger

    def _log(self, level: int, event: str, **fields: Any) -> None:
        if fields:
            self._logger.log(level, "%s %s", event, " ".join(f"{k}={v!r}" for k, v in sorted(fields.items())))
        else:
            self._logger.log(level, event)

    def debug(self, event: str, **fields: Any) -> None:
        self._log(logging.DEBUG, event, **fields)

    def info(self, event: str, **fields: Any) -> None:
        self._log(logging.INFO, event, **fields)

    def warning(self, event: str, **fields: Any) -> None:
        self._log(logging.WARNING, event, **fields)

    def error(self, event: str, **fields: Any) -> None:
        self._log(logging.ERROR, event, **fields)


def _renderer() -> Any:
    if settings.ENVIRONMENT == "production":
        return structlog.processors.JSONRenderer()
    return structlog.dev.ConsoleRenderer(colors=False)


def _shared_processors() -> List[Any]:
    return [
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
    ]


def _dict_config(log_level: str) -> Dict[str, Any]:
    quiet_level = "WARNING" if log_level == "INFO" else log_level
    loggers: Dict[str, Any] = {"": {"handlers": ["stderr"], "level": log_level, "propagate": True}}
    for name in CHATTY_LOGGERS:
        loggers[name] = {"handlers": ["stderr"], "level": quiet_level, "propagate": False}
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "structured": {"()": structlog.stdlib.ProcessorFormatter, "processor": _renderer()},
        },
        "handlers": {
            "stderr": {"class": "logging.StreamHandler", "formatter": "structured", "stream": sys.stderr},
        },
        "loggers": loggers,
    }


def configure_logging(level: str | None = None) -> None:
    """Configure logging once per process; ``level`` overrides ``LOG_LEVEL``."""
    log_level = (level or settings.LOG_LEVEL).upper()

    if not STRUCTLOG_AVAILABLE:
        logging.basicConfig(
            level=log_level,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
            force=True,
        )
        return

    structlog.configure(
        processors=[*_shared_processors(), _renderer()],
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )
    logging.config.dictConfig(_dict_config(log_level))


def get_logger(name: str) -> Any:
    if STRUCTLOG_AVAILABLE:
        return structlog.get_logger(name)
    return _StdLoggerAdapter(logging.getLogger(name))


class LoggerMixin:
    """Gives a class a ``logger`` named ``blockpki.<ClassName>``."""

    @property
    def logger(self) -> Any:
        return get_logger(f"blockpki.{self.__class__.__name__}")


class ProtocolLogger:
    """Logger for issuance protocol milestones."""

    def __init__(self):
        self.logger = get_logger("blockpki.protocol")

    def contract_created(self, contract: str, domain: str, threshold: int, height: int) -> None:
        self.logger.info(
            "domain_contract_created",
            contract=contract,
            domain=domain,
            threshold=threshold,
            height=height,
        )

    def nonce_round_complete(self, contract: str, height: int) -> None:
        self.logger.info("all_cert_nonces_gathered", contract=contract, height=height)

    def signature_round_complete(self, contract: str, height: int) -> None:
        self.logger.info("all_cert_signatures_gathered", contract=contract, height=height)

    def certificate_logged(self, domain: str, tx_hash: str, block_no: int, blocks_elapsed: int) -> None:
        self.logger.info(
            "certificate_logged",
            domain=domain,
            tx_hash=tx_hash,
            block_no=block_no,
            blocks_elapsed=blocks_elapsed,
        )

    def issuance_failed(self, domain: str, reason: str, ca_ids: Iterable[str] = ()) -> None:
        self.logger.warning(
            "issuance_failed",
            domain=domain,
            reason=reason,
            ca_ids=list(ca_ids),
        )

    def certificate_rejected(self, domain: str, mode: str, reason: str) -> None:
        self.logger.info(
            "certificate_rejected",
            domain=domain,
            mode=mode,
            reason=reason,
        )

    def anomaly_detected(self, domain: str, tx_hash: str, sender: str) -> None:
        self.logger.warning(
            "monitor_anomaly",
            domain=domain,
            tx_hash=tx_hash,
            sender=sender,
        )


# shared by every feature package
protocol_logger = ProtocolLogger()
