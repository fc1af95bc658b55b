"""Indoor VLC simulator with mirror-array assisted proactive handover."""

__version__ = "0.1.0"
