"""
Scenario configuration models and the records a run produces.
"""
