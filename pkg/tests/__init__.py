"""Test suite for the attitude control simulator."""
