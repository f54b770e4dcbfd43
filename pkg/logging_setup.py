"""
QCStar Logging Infrastructure
Centralized logging with file rotation and JSON-structured file output.
"""
import logging
import logging.handlers
from pathlib import Path
from typing import Optional

from pythonjsonlogger import jsonlogger

from config import config


def setup_logging():
    """Configure the qcstar logger (console + rotating JSON file)"""
    logger = logging.getLogger("qcstar")
    logger.setLevel(getattr(logging, config.logging.level, logging.INFO))
    if logger.handlers:
        return logger

    # Console handler
    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.WARNING)
    console_handler.setFormatter(logging.Formatter('%(levelname)s - %(message)s'))
    logger.addHandler(console_handler)

    # File handler with rotation
    if config.logging.file_path:
        log_dir = Path(config.logging.file_path).parent
        log_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            config.logging.file_path,
            maxBytes=config.logging.max_bytes,
            backupCount=config.logging.backup_count
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(jsonlogger.JsonFormatter(config.logging.format))
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger

# Global logger instance
logger = setup_logging()


def set_verbosity(level: str):
    """Raise or lower console verbosity at runtime (CLI --verbose)"""
    numeric = getattr(logging, level.upper(), logging.INFO)
    logger.setLevel(min(numeric, logger.level))
    for handler in logger.handlers:
        if isinstance(handler, logging.StreamHandler) and not isinstance(
            handler, logging.handlers.RotatingFileHandler
        ):
            handler.setLevel(numeric)


def log_solve(n: int, picture: str, method: str, n_solutions: int,
              max_residual: float, starts: Optional[int] = None):
    """Structured logging for stencil solves"""
    msg = (f"[SOLVER] n={n} {picture} {method} - {n_solutions} solution(s), "
           f"max residual {max_residual:.2e}")
    if starts is not None:
        msg += f" ({starts} starts)"
    logger.info(msg)


def log_evolution(size: int, ic: str, sites: int, max_residual: float):
    """Structured logging for lattice evolution"""
    logger.info(f"[LATTICE] {size}x{size} {ic} - {sites} sites solved, "
                f"max stencil residual {max_residual:.2e}")


def log_cafcc(n: int, picture: str, trial: int, success: bool, backtracks: int):
    """Structured logging for consistency trials"""
    status = "ok" if success else "FAILED"
    logger.info(f"[CAFCC] n={n} {picture} trial {trial} - {status} (backtracks: {backtracks})")


def log_quadrature(name: str, value: complex, error: float, radius: float):
    """Structured logging for quadratures"""
    logger.info(f"[QUADRATURE] {name} = {value:.6e} (err {error:.1e}, R={radius:.2f})")


def log_error(component: str, error: Exception, context: str = ""):
    """Structured error logging"""
    logger.error(
        f"[ERROR] {component} - {type(error).__name__}: {str(error)}"
        f"{' - ' + context if context else ''}"
    )
