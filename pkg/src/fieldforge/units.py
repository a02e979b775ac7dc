"""Unit-suffixed quantity parsing.

Config documents carry numbers as strings such as ``"50 kHz"`` or
``"4.4 uH"``. Everything is converted to SI on load; dumping always writes
the SI base unit so that a load/dump cycle is lossless.
"""

from __future__ import annotations

import math
import re

MU0 = 4e-7 * math.pi

_PREFIXES = {
    "f": 1e-15,
    "p": 1e-12,
    "n": 1e-9,
    "u": 1e-6,
    "µ": 1e-6,
    "μ": 1e-6,
    "m": 1e-3,
    "": 1.0,
    "k": 1e3,
    "M": 1e6,
}

# symbol -> dimension tag; prefixes allowed
_BASE = {
    "Hz": "frequency",
    "T": "flux_density",
    "A": "current",
    "V": "voltage",
    "H": "inductance",
    "F": "capacitance",
    "m": "length",
    "s": "time",
    "ohm": "resistance",
    "Ω": "resistance",
    "W": "power",
    "VA": "power",
    "g": "mass",
}

# units that take no prefix: symbol -> (scale, dimension)
_COMPOUND = {
    "1": (1.0, "dimensionless"),
    "%": (1e-2, "dimensionless"),
    "rad": (1.0, "angle"),
    "deg": (math.pi / 180.0, "angle"),
    "ohm*m": (1.0, "resistivity"),
    "ohm*mm^2/m": (1e-6, "resistivity"),
    "J/(kg*K)": (1.0, "specific_heat"),
    "J/(g*K)": (1e3, "specific_heat"),
    "kg/m^3": (1.0, "density"),
    "g/cm^3": (1e3, "density"),
    "mg/mL": (1.0, "density"),
    "g/L": (1.0, "density"),
    "W/kg": (1.0, "specific_power"),
    "W/g": (1e3, "specific_power"),
    "W/K": (1.0, "conductance_thermal"),
    "J/K": (1.0, "heat_capacity"),
    "degC": (1.0, "temperature"),
    "degC/s": (1.0, "temperature_rate"),
    "K/s": (1.0, "temperature_rate"),
}

# canonical SI symbol written back on dump
SI_SYMBOL = {
    "frequency": "Hz",
    "flux_density": "T",
    "current": "A",
    "voltage": "V",
    "inductance": "H",
    "capacitance": "F",
    "length": "m",
    "time": "s",
    "resistance": "ohm",
    "power": "W",
    "mass": "kg",
    "dimensionless": "1",
    "angle": "rad",
    "resistivity": "ohm*m",
    "specific_heat": "J/(kg*K)",
    "density": "kg/m^3",
    "specific_power": "W/kg",
    "conductance_thermal": "W/K",
    "heat_capacity": "J/K",
    "temperature": "degC",
    "temperature_rate": "degC/s",
}

_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")


class UnitError(ValueError):
    """Raised for malformed quantities or a unit of the wrong dimension."""


def _lookup(unit: str) -> tuple[float, str]:
    if unit == "":
        return 1.0, "dimensionless"
    if unit in _COMPOUND:
        return _COMPOUND[unit]
    if unit == "kg":
        return 1.0, "mass"
    # longest base symbol first so "mohm" is milli-ohm and "m" is metre
    for base in sorted(_BASE, key=len, reverse=True):
        if unit.endswith(base):
            prefix = unit[: -len(base)]
            if prefix in _PREFIXES:
                scale = _PREFIXES[prefix]
                if base == "g":
                    scale *= 1e-3
                return scale, _BASE[base]
    raise UnitError(f"unknown unit {unit!r}")


def parse_quantity(text, dimension: str | None = None) -> float:
    """Convert ``"12.5 mT"`` to ``0.0125``.

    Bare numbers are accepted only where ``dimension`` is ``None`` or
    ``"dimensionless"``.
    """
    if isinstance(text, bool):
        raise UnitError(f"expected a quantity, got {text!r}")
    if isinstance(text, (int, float)):
        if dimension not in (None, "dimensionless"):
            raise UnitError(f"{text!r} is missing a unit (expected {dimension})")
        return float(text)
    m = _QTY.match(str(text))
    if not m:
        raise UnitError(f"cannot parse quantity {text!r}")
    value, unit = float(m.group(1)), m.group(2)
    scale, dim = _lookup(unit)
    if dimension is not None and dim != dimension:
        raise UnitError(f"{text!r} has dimension {dim}, expected {dimension}")
    return value * scale


def format_quantity(value: float, dimension: str) -> str:
    """Inverse of :func:`parse_quantity` in SI units; ``repr`` keeps every bit."""
    symbol = SI_SYMBOL[dimension]
    if symbol == "1":
        return repr(float(value))
    return f"{float(value)!r} {symbol}"
