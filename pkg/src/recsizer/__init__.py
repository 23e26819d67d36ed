"""Sizing of rooftop PV and battery storage for renewable energy community participants."""

__version__ = "0.1.0"
