"""Pointwise differential geometry of graphs over flat tori."""
