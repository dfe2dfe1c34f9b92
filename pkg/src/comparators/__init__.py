# Comparators package for resolution and time-step sweeps
