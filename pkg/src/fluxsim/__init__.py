"""Flux-pulse-assisted fluxonium readout simulator."""

__version__ = "0.1.0"
