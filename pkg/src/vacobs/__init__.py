"""UK job-vacancy observatory: ingest, classify, locate and analyse job ads."""

__version__ = "0.1.0"
