"""
Runnable entry points.
"""
