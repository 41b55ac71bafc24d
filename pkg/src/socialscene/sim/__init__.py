"""Deterministic scenario simulator: scripts, virtual sensors, engine, metrics."""
