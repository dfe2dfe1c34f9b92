"""Lagrangian graphs: potential-generated data, J-adapted frames and symmetry checks."""
