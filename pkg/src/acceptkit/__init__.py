"""Toolkit for task-specific acceptability labeling and detection of machine translations."""

__version__ = "0.1.0"
