"""Torque laws, parameter adaptation and closed-loop controllers."""
