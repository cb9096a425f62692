"""
Beam Reforming Agent

Deep Q-learning agent that corrects the positions and phases of hovering
UAVs so their collaborative beam matches the nominal one.
"""
