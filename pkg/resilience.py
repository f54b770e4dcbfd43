"""
QCStar Resilience Utilities
Error taxonomy, escalating retries for multistart searches and failure budgets for batches.
"""
from datetime import datetime
from enum import Enum
from typing import Callable, Dict, Optional, Any

from logging_setup import logger


class QCStarError(Exception):
    """Root of all library errors"""


class DomainError(QCStarError, ValueError):
    """Argument outside the domain of a function (branch cut, strip, wrong n, parameter range)"""


class PoleError(DomainError):
    """Argument sits on a pole or zero of the hyperbolic gamma function"""


class SingularityError(QCStarError, ZeroDivisionError):
    """A leg denominator vanished"""

    def __init__(self, message: str, label: str = ""):
        super().__init__(f"{message}{' [' + label + ']' if label else ''}")
        self.label = label


class DegenerateError(QCStarError, ArithmeticError):
    """Degenerate polynomial data (vanishing leading coefficient, repeated roots)"""


class SearchFailure(QCStarError):
    """A root search or branch search found no admissible solution"""

    def __init__(self, message: str, best_residual: float = float("inf")):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


class AccuracyError(QCStarError):
    """A quadrature could not reach its accuracy target"""

    def __init__(self, message: str, estimate: Any = None, error: float = float("inf")):
        super().__init__(f"{message} (error estimate {error:.3e})")
        self.estimate = estimate
        self.error = error


class ConfigurationError(QCStarError, ValueError):
    """Invalid initial condition or run configuration"""


def retry_with_escalation(
    func: Callable[[int, int], Any],
    starts: int,
    seed: int,
    max_attempts: int = 3,
    growth: int = 2,
    max_starts: int = 4096,
    exceptions: tuple = (SearchFailure,)
):
    """
    Rerun a multistart search with more starts and a fresh seed until it succeeds.

    Args:
        func: Callable taking (starts, seed)
        starts: Start count of the first attempt
        seed: Seed of the first attempt; attempt k uses seed + 7919 * k
        max_attempts: Maximum number of attempts
        growth: Start-count multiplier between attempts
        max_starts: Upper bound on the start count
        exceptions: Exceptions that trigger a retry

    Returns:
        Result of the first successful attempt

    Raises:
        Last exception if all attempts fail
    """
    last_exception = None
    for attempt in range(max_attempts):
        attempt_starts = min(starts * growth ** attempt, max_starts)
        attempt_seed = seed + 7919 * attempt
        try:
            return func(attempt_starts, attempt_seed)
        except exceptions as e:
            last_exception = e
            if attempt == max_attempts - 1:
                logger.error(f"[Retry] All {max_attempts} attempts failed: {e}")
                raise
            logger.warning(
                f"[Retry] Attempt {attempt + 1}/{max_attempts} failed: {e}. "
                f"Retrying with {min(attempt_starts * growth, max_starts)} starts..."
            )
    raise last_exception


class BudgetState(Enum):
    """Failure budget states"""
    RUNNING = "running"    # trials continue
    EXHAUSTED = "exhausted"  # too many consecutive failures, batch stops


class FailureBudget:
    """
    Consecutive-failure counter for batch experiments.
    A batch stops early once the threshold is reached; a success resets the count.
    """

    def __init__(self, name: str, threshold: int = 25):
        """
        Args:
            name: Budget name for logging
            threshold: Consecutive failures tolerated before exhaustion
        """
        self.name = name
        self.threshold = threshold
        self.consecutive_failures = 0
        self.total_failures = 0
        self.last_failure_time: Optional[datetime] = None
        self.state = BudgetState.RUNNING

    @property
    def exhausted(self) -> bool:
        return self.state == BudgetState.EXHAUSTED

    def record(self, success: bool):
        """Register the outcome of one trial"""
        if success:
            self.consecutive_failures = 0
            return
        self.consecutive_failures += 1
        self.total_failures += 1
        self.last_failure_time = datetime.now()
        if self.consecutive_failures >= self.threshold and not self.exhausted:
            self.state = BudgetState.EXHAUSTED
            logger.warning(
                f"[Budget] {self.name} exhausted after "
                f"{self.consecutive_failures} consecutive failures"
            )

    def get_state(self) -> Dict:
        """Get current budget state"""
        return {
            'name': self.name,
            'state': self.state.value,
            'consecutive_failures': self.consecutive_failures,
            'total_failures': self.total_failures,
            'last_failure': self.last_failure_time.isoformat() if self.last_failure_time else None
        }
