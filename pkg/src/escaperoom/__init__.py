"""Procedurally generated escape rooms with a first-person agent protocol,
scripted/random/remote players, and a process-level evaluation suite."""

__version__ = "0.1.0"
