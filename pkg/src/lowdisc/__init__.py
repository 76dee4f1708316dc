"""Low-lying zeros of quadratic Dirichlet L-functions and the lower bounds on
the de Bruijn-Newman constant of each discriminant that they imply."""

__version__ = "0.1.0"
