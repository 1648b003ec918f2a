"""
Application package: settings and the sweep command line.
"""

__version__ = "0.1.0"
