"""Minimum-length logic-and-accuracy test decks that expose every target swap."""

__version__ = "0.1.0"
