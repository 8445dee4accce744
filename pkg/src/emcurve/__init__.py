"""Torsion, rank lower bounds and 2-Selmer groups for the curve family E_m."""

ENGINE_VERSION = "1"
