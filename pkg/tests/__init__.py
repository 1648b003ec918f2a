"""
Test suite for the quantum memory sensitivity toolkit.
"""
