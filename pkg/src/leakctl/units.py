"""Angular-frequency and phase parsing.

All frequencies inside the package are angular (rad/s).  Config files and CLI
flags accept the literal forms ``2pi*30MHz`` / ``-2pi*1.55MHz`` for angular
frequencies and ``0.15pi`` / ``-0.04pi`` for phases, which keeps the factor of
2*pi out of user-supplied numbers.
"""

from __future__ import annotations

import math
import re

from .errors import ConfigError

TWO_PI = 2.0 * math.pi

_SI = {"GHz": 1e9, "MHz": 1e6, "kHz": 1e3, "Hz": 1.0}

_ANGULAR_RE = re.compile(
    r"^\s*(?P<sign>[+-]?)\s*2\s*pi\s*\*\s*(?P<num>[0-9.eE+-]+)\s*(?P<unit>GHz|MHz|kHz|Hz)\s*$"
)
_PHASE_RE = re.compile(r"^\s*(?P<num>[+-]?[0-9.eE+-]*?)\s*pi\s*$")


def two_pi(value_hz: float) -> float:
    """Plain cycles/s -> rad/s."""
    return TWO_PI * value_hz


def parse_angular(value) -> float:
    """Parse an angular frequency into rad/s.

    Accepts a plain number (already rad/s) or a string like ``2pi*30MHz``.
    """
    if isinstance(value, (int, float)):
        return float(value)
    m = _ANGULAR_RE.match(str(value))
    if not m:
        raise ConfigError(f"cannot parse angular frequency {value!r}")
    sign = -1.0 if m.group("sign") == "-" else 1.0
    try:
        num = float(m.group("num"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse angular frequency {value!r}") from exc
    return sign * TWO_PI * num * _SI[m.group("unit")]


def parse_phase(value) -> float:
    """Parse a phase into radians; strings like ``-0.04pi`` are multiples of pi."""
    if isinstance(value, (int, float)):
        return float(value)
    m = _PHASE_RE.match(str(value))
    if not m:
        raise ConfigError(f"cannot parse phase {value!r}")
    num = m.group("num")
    if num in ("", "+"):
        factor = 1.0
    elif num == "-":
        factor = -1.0
    else:
        try:
            factor = float(num)
        except ValueError as exc:
            raise ConfigError(f"cannot parse phase {value!r}") from exc
    return factor * math.pi
