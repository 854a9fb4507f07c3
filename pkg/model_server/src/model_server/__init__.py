"""Training and serving for the text-to-SPARQL sequence model."""

__version__ = "0.1.0"
