"""
Seeded random streams.
"""
