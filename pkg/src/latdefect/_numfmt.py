"""Significant-digit formatting shared by reports and emitters."""

from __future__ import annotations

import math


def fmt_number(x: float, digits: int = 17) -> str:
    if x == 0:
        return "0"  # also folds -0.0
    return format(float(x), f".{digits}g")


def round_floats(obj, digits: int = 17):
    """Round every float in a JSON-like tree to ``digits`` significant digits; non-finite becomes None."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(fmt_number(obj, digits))
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj
