"""
Contracts Feature
Central, domain and storage contracts over the simulated ledger
"""
