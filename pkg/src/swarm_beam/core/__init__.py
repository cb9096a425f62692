"""
Simulation core for swarm-beam

Geometry, hovering perturbations, channels, interference, beam patterns
and subset selection.
"""
