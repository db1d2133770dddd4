"""Stability analysis of heteroclinic ac-networks."""
