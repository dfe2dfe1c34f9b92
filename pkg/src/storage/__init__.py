"""Persistence of run outputs: time series CSV, JSON reports and field snapshots."""
