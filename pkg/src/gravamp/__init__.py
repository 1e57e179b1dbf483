"""Weak-value amplified test of mediator-induced entanglement."""

from .bmv import BmvParams, GravityParams, gravitational_phase, weak_values
from .criterion import DeviceModel, evaluate_criterion

__all__ = ["BmvParams", "GravityParams", "DeviceModel", "evaluate_criterion", "gravitational_phase", "weak_values"]
__version__ = "0.1.0"
