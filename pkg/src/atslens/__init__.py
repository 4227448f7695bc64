"""Third-party advertising and tracking service detection in mobile app flow logs."""

__version__ = "0.1.0"
