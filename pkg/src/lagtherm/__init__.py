"""Simulation of mechanical, thermal and chemical systems with audited first and second laws."""

__version__ = "0.1.0"
