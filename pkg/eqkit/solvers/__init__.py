"""Equilibrium solvers: pure, mixed and correlated equilibria, best-response dynamics."""
