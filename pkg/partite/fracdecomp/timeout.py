"""Code to stop a run after a certain amount of time."""
import logging
from signal import SIGALRM, alarm, signal
from types import FrameType
from typing import Optional

from .errors import TimeLimitExceeded

LOGGER = logging.getLogger(__name__)


def timeout_handler(signal_type: int, stack_frame: Optional[FrameType]) -> None:
    """Handle the `SIGALRM` by interrupting the current computation."""
    raise TimeLimitExceeded("Time limit expired")


def kill_after_delay(timeout_seconds: int) -> None:
    """Interrupts main process after the given delay."""
    LOGGER.debug(f"Time limit set: {timeout_seconds}s")
    signal(SIGALRM, timeout_handler)
    alarm(timeout_seconds)


def cancel_delay() -> None:
    """Cancel a pending :func:`kill_after_delay`."""
    alarm(0)
