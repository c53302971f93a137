"""
Actors Feature
Requester, CA and monitor agents, the simulation driver and attack replays
"""
