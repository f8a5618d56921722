"""Pulsed optical-potential interference of levitated nanoparticles: analytic model, decoherence budget and numerical checks."""

__version__ = "0.1.0"
