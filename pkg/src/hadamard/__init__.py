"""Numerical verification of Hadamard-type integral inequalities."""

from hadamard.bounds import BoundReport, Settings
from hadamard.convexity import ClassSpec, certify
from hadamard.expr import parse, pretty
from hadamard.quad import Interval, integrate

__all__ = ["BoundReport", "ClassSpec", "Interval", "Settings", "certify", "integrate", "parse", "pretty"]
