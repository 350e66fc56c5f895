"""
apsim: discrete-event VANET simulator with antenna pointing, free-space
propagation and a per-packet radio pipeline.
"""

__version__ = "1.0.0"
