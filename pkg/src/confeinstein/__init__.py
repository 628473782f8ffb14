"""Weyl-tensor identities and conformally Einstein classification."""

__version__ = "0.1.0"
