"""Scenario input and result schemas."""
