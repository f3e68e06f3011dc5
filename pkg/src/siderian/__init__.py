"""Blowup certificates and radial shock simulations for relativistic fluids and electron plasmas."""

__version__ = "0.1.0"
