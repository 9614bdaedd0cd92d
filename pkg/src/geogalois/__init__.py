"""Differential Galois obstructions to integrability of geodesic flows on Monge surfaces."""

__version__ = "0.1.0"
