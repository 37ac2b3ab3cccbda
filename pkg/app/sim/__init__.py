"""Scenario configuration, closed-loop simulation, metrics and verification."""
