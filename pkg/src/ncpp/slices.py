"""Bit-rate to spectrum-slice conversion on a flexgrid.

Rates are handled as :class:`~decimal.Decimal` at the API boundary and as
exact :class:`~fractions.Fraction` internally, so the ceiling in
:func:`slices_for_rate` never suffers binary rounding at slice boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Union

Rate = Union[Decimal, int, str, Fraction]

DEFAULT_SLICE_WIDTH = Decimal("6.25")


def as_rate(value: Rate | float) -> Decimal:
    """Coerce ``value`` to an exact Decimal rate in Gb/s.

    Floats go through ``str`` so that ``0.1`` becomes ``Decimal("0.1")``.
    """
    if isinstance(value, Decimal):
        return value
    if isinstance(value, Fraction):
        return Decimal(value.numerator) / Decimal(value.denominator)
    if isinstance(value, float):
        return Decimal(str(value))
    return Decimal(value)


@dataclass(frozen=True)
class ModulationFormat:
    name: str
    bits_per_symbol: int
    pol_mux: bool = True

    def __post_init__(self):
        if self.bits_per_symbol < 1:
            raise ValueError(f"bits_per_symbol must be positive, got {self.bits_per_symbol}")


@dataclass(frozen=True)
class GridSpec:
    """Flexgrid parameters.

    ``overhead`` scales the usable symbol rate per slice (1.0 means the symbol
    rate in Gbaud equals the slice width in GHz, no guard band or FEC).
    """

    slice_width: Decimal = DEFAULT_SLICE_WIDTH
    overhead: Decimal = Decimal(1)

    def __post_init__(self):
        object.__setattr__(self, "slice_width", as_rate(self.slice_width))
        object.__setattr__(self, "overhead", as_rate(self.overhead))
        if self.slice_width <= 0:
            raise ValueError(f"slice_width must be > 0, got {self.slice_width}")
        if self.overhead <= 0:
            raise ValueError(f"overhead must be > 0, got {self.overhead}")


QPSK_PM = ModulationFormat("qpsk-pm", 2, True)
QAM16_PM = ModulationFormat("16qam-pm", 4, True)

PRESETS: dict[str, ModulationFormat] = {m.name: m for m in (QPSK_PM, QAM16_PM)}


def modulation(name: str) -> ModulationFormat:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown modulation preset {name!r}; known: {sorted(PRESETS)}") from None


def slice_capacity(m: ModulationFormat, g: GridSpec = GridSpec()) -> Decimal:
    """Bit-rate one slice carries, in Gb/s."""
    pol = 2 if m.pol_mux else 1
    return g.slice_width * g.overhead * m.bits_per_symbol * pol


def slices_for_rate(rate: Rate, m: ModulationFormat, g: GridSpec = GridSpec()) -> int:
    """Number of contiguous slices needed to carry ``rate`` Gb/s."""
    r = Fraction(as_rate(rate))
    if r < 0:
        raise ValueError(f"rate must be non-negative, got {rate}")
    return math.ceil(r / Fraction(slice_capacity(m, g)))


def coded_slices(member_rates: Iterable[Rate], m: ModulationFormat, g: GridSpec = GridSpec()) -> int:
    """Slices of the XOR of several signals.

    The shorter signals are zero-padded to the longest, so the coded signal
    runs at the maximum member rate.
    """
    rates = [as_rate(r) for r in member_rates]
    if not rates:
        raise ValueError("coded_slices needs at least one member rate")
    if any(r < 0 for r in rates):
        raise ValueError(f"rates must be non-negative, got {rates}")
    return slices_for_rate(max(rates), m, g)


def format_rate(rate: Rate) -> str:
    """Render a rate without trailing zeros: ``Decimal("100.00") -> "100"``."""
    d = as_rate(rate)
    if d == d.to_integral_value():
        return str(int(d))
    return format(d.normalize(), "f")
