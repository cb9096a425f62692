"""
Swarm Beam

Simulation library and command-line runner for collaborative beamforming
with hovering UAV swarms: subset selection under interference and deep
Q-learning beam re-forming.
"""

__version__ = "0.1.0"
__author__ = "Swarm Beam Team"
