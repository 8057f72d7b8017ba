"""chatbrush: dialogue-driven image editing on procedural scenes."""

__version__ = "0.1.0"


class ChatbrushError(Exception):
    """Base class for package errors."""


class DataError(ChatbrushError):
    """Bad input data, files, or records (CLI exit code 2)."""


class ModelError(ChatbrushError):
    """Missing, untrained, or mismatched model state (CLI exit code 3)."""
