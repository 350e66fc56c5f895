"""
Simulation core: geometry, antennas, propagation, the radio pipeline and the event engine.
"""
