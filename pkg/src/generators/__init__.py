# Generators package for initial maps
