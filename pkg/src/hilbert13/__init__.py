"""Function superposition laboratory: pairing maps, composition DAGs, counting and fitting."""

__version__ = "0.1.0"
