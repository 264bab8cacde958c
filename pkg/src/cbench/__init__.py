"""cbench: learn, validate, query and deploy discrete causal graphical models."""

__version__ = "0.1.0"
