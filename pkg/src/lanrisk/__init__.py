"""lanrisk: risk assessment and treatment engine for LAN security programs."""

__version__ = "0.1.0"
