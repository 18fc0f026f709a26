"""Certified conformal decompositions for volume-spectrum upper bounds."""
