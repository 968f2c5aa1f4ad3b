"""Solvers for the orienteering interdiction game."""
