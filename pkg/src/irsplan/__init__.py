"""Site-specific coverage simulation and deployment planning for IRS-assisted links."""

__version__ = "0.1.0"
