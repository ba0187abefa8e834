"""Carbon-price pass-through: dispatch LP, scenario sweeps, district-heating thresholds."""

__version__ = "0.1.0"
