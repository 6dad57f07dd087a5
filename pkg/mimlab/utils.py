import logging
from typing import List, Optional

import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from mimlab.config import default_log_level
from mimlab.errors import ValidationError

# Shared utility functions for mimlab


def configure_logging(level: Optional[str] = None) -> None:
    """Install a RichHandler on the package logger. Output goes to stderr."""
    logger = logging.getLogger("mimlab")
    logger.setLevel((level or default_log_level()).upper())
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(
            console=Console(stderr=True),
            show_path=False,
            rich_tracebacks=False,
        )
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
    logger.propagate = False


def space_indent(text: str) -> str:
    return "\n".join(
        "    " + line if line.strip() else "" for line in text.splitlines()
    )


def format_number(value: Optional[float], digits: int = 12) -> str:
    """Locale-independent float formatting; None renders as 'undefined'."""
    if value is None:
        return "undefined"
    text = f"{value:.{digits}g}"
    # integral values keep a trailing .0
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def parse_batches(text: str) -> List[int]:
    """
    Parse a batch schedule.

    Accepts either a comma separated list ("500,1000,2000") or a
    size-times-count shorthand ("1000x10").
    """
    text = text.strip().lower()
    try:
        if "x" in text:
            size, count = text.split("x", 1)
            sizes = [int(size)] * int(count)
        else:
            sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse {text!r}", field="batches") from None
    if not sizes:
        raise ValidationError("at least one batch is required", field="batches")
    if any(size < 1 for size in sizes):
        raise ValidationError("batch sizes must be positive", field="batches")
    return sizes


def parse_grid(text: str) -> List[float]:
    """Parse an inclusive 'start:stop:step' grid."""
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise ValidationError(
            f"expected start:stop:step, got {text!r}", field="grid"
        ) from None
    if step <= 0 or stop < start:
        raise ValidationError("need step > 0 and stop >= start", field="grid")
    count = int(round((stop - start) / step)) + 1
    values = np.round(start + step * np.arange(count), 12)
    return [float(v) for v in values if v <= stop + 1e-12]
