"""Logger Setup."""

import logging
import sys
from pathlib import Path
from typing import Union

TRACE_LOGGER_NAME = "partite.fracdecomp.trace"

_FORMAT = '%(name)s %(levelname)s - %(message)s'


def logger_setup(*, verbose: bool = False) -> None:
    """Setup the logger."""
    root = logging.getLogger()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)

    if any(getattr(h, "_fracdecomp", False) for h in root.handlers):
        return

    handler = logging.StreamHandler(sys.stderr)

    formatter = logging.Formatter(_FORMAT)
    handler.setFormatter(formatter)
    setattr(handler, "_fracdecomp", True)

    root.addHandler(handler)


def trace_setup(path: Union[str, Path]) -> logging.Handler:
    """
    Send the per-stage trace to a file.

    The trace logger stops propagating to the root logger while the
    file handler is attached.

    :param path: File to write the trace to. Truncated if it exists.
    :returns: The handler, to pass to :func:`trace_teardown`.
    """
    trace = logging.getLogger(TRACE_LOGGER_NAME)
    handler = logging.FileHandler(path, mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter('%(message)s'))
    trace.addHandler(handler)
    trace.setLevel(logging.DEBUG)
    trace.propagate = False
    return handler


def trace_teardown(handler: logging.Handler) -> None:
    """Detach a handler added by :func:`trace_setup`."""
    trace = logging.getLogger(TRACE_LOGGER_NAME)
    trace.removeHandler(handler)
    handler.close()
    if not trace.handlers:
        trace.setLevel(logging.NOTSET)
        trace.propagate = True
