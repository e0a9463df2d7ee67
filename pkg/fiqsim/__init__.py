"""
FIQ Simulation Toolkit
======================

Finite-information quantities, lazily actualized chaotic dynamics, their
hidden-variable supplementations, and the statistics that compare them.
"""

__version__ = "1.0.0"
