"""Multilingual text-to-SPARQL pipeline and QALD-style evaluation harness."""

__version__ = "0.1.0"
