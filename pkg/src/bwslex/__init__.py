"""Best-worst scaling toolkit for emotion-intensity lexicon construction."""

__version__ = "0.1.0"
