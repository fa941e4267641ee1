"""
openff-adiabatic
A numerical laboratory for the adiabatic limit of finite-level quantum systems.
"""

__version__ = "0.1.0"
