"""Render figures from qpdyn CLI outputs.

Reads only the documented file schemas (frequency JSON, mode JSON,
trajectory/error CSV); never touches pipeline internals.
"""

from .schemas import SchemaError, load_frequencies, load_modes, load_table
from .render import (
    render_error,
    render_frequencies,
    render_modes,
    render_overlay,
)

__version__ = "0.1.0"

__all__ = [
    "SchemaError",
    "load_frequencies",
    "load_modes",
    "load_table",
    "render_overlay",
    "render_frequencies",
    "render_modes",
    "render_error",
]
