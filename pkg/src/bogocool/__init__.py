"""Cooling of a trapped atom by immersion in a superfluid: rates, dynamics, limits."""

__version__ = "0.1.0"
