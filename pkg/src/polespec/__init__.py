"""Pole-order spectral sequence of a reduced projective hypersurface."""
