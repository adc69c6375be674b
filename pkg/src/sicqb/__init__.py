"""SIC-POVM search and probability-only quantum state calculus."""

__version__ = "0.1.0"
