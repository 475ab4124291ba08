"""Scattering transform, long-time asymptotics and PDE validation for u_tt - u_xx = e^{-2u} - e^u."""

__version__ = "0.1.0"
