"""Invariant complex Finsler (Kähler–Berwald) metrics on the classical Cartan domains."""

__version__ = "0.1.0"
