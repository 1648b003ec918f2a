"""
Core modules for storage simulation, control fields, optimization and sensitivity analysis.
"""
