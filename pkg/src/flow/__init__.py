"""Time stepping of the graphical mean curvature flow."""
