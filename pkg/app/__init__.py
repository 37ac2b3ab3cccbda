"""Quaternion Sliding-Variable Attitude Control - Library and Simulator"""

__version__ = "1.0.0"
__author__ = "Attitude Control Team"
