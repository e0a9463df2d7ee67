"""
Utility functions for the FIQ Simulation Toolkit
"""

import csv
import json
import logging
import logging.config
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence

import structlog

from . import __version__
from .config import RunConfig, Settings


def setup_logging(settings: Settings) -> None:
    """Configure structured logging; everything goes to stderr or the log file"""

    handlers: Dict[str, Dict[str, Any]] = {
        "console": {
            "level": settings.log_level,
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "console",
        },
    }
    if settings.log_file:
        handlers["file"] = {
            "level": "DEBUG",
            "class": "logging.handlers.RotatingFileHandler",
            "filename": settings.log_file,
            "maxBytes": 10 * 1024 * 1024,  # 10MB
            "backupCount": 5,
            "formatter": "json",
        }

    log_config = {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "console": {
                "()": structlog.stdlib.ProcessorFormatter,
                "processor": structlog.dev.ConsoleRenderer(colors=False),
            },
            "json": {
                "()": structlog.stdlib.ProcessorFormatter,
                "processor": structlog.processors.JSONRenderer(),
            },
        },
        "handlers": handlers,
        "loggers": {
            "": {
                "handlers": list(handlers),
                "level": "DEBUG" if settings.log_file else settings.log_level,
                "propagate": False,
            },
        },
    }

    logging.config.dictConfig(log_config)

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


def provenance(config: RunConfig) -> Dict[str, Any]:
    """Block embedded in every output file"""
    return {
        "config_sha256": config.config_hash(),
        "seed": config.seed,
        "version": __version__,
    }


def write_json(path: Path, payload: Mapping[str, Any], config: RunConfig) -> Path:
    """Deterministic JSON: sorted keys, provenance block, no timestamps"""
    document = {"provenance": provenance(config)}
    document.update(payload)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
                    encoding="utf-8")
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Mapping[str, Any]],
              config: RunConfig) -> Path:
    """CSV with a leading '# config_sha256=... seed=...' comment line"""
    meta = provenance(config)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(
            f"# config_sha256={meta['config_sha256']} seed={meta['seed']} "
            f"version={meta['version']}\n"
        )
        writer = csv.DictWriter(handle, fieldnames=list(header), extrasaction="ignore",
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_run_log(out_dir: Path, command: str, config: RunConfig,
                  started: datetime, files: Sequence[Path],
                  error: Optional[Dict[str, Any]] = None) -> Path:
    """Wall-clock record of a run, kept apart from the reproducible payloads"""
    record = {
        "command": command,
        "provenance": provenance(config),
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "files": [str(f.name) for f in files],
        "error": error,
    }
    path = out_dir / "run_log.json"
    path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
