"""
Dirac Bubbles - verification toolkit for the critical nonlinear Dirac equation

Builds the explicit ground-state spinor family on R^n and S^n together with
the operators and functionals around it, and certifies the closed-form
identities numerically.
"""

__version__ = "1.0.0"
