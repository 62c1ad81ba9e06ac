"""
Demand-private coded caching: schemes, bounds, curves and auditors.

Nothing here imports Django except config, which reads its defaults from
settings.
"""
