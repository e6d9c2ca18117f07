"""Explicit solutions and inviscid damping of linearized stratified Couette flow."""

__version__ = "0.1.0"
