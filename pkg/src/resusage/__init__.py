"""Static checking of resource-usage protocols for pi-calculus programs."""

__version__ = "0.1.0"
