"""Geometric core: quaternion algebra, rigid-body plant and sliding variables."""
