"""Reported age-of-information scheduling over finite-blocklength links with CRC detection."""

__version__ = "0.1.0"
