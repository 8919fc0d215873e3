"""Analog IC placement: MILP model, warm starts and matheuristic local search."""
