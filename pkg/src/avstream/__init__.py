"""Streaming audio-visual hybrid CTC/attention recognizer, desk scale."""

__version__ = "0.1.0"
