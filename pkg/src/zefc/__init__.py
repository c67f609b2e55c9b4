"""Zero-error distributed compression of binary sums: codes, converses, capacities."""

__version__ = "0.1.0"
