"""gapmine: mining and evaluating knowledge-gap statements in scientific text."""

__version__ = "0.1.0"
