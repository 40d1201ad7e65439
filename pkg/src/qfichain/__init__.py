"""Quantum Fisher information of subsystems of free-fermion spin chains."""

__version__ = "0.1.0"
