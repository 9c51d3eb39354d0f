"""Synthetic document-level chart question answering dataset generator."""

__version__ = "0.1.0"
