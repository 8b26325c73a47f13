"""Translation-invariant boundary laws of the four-state hard-core models
"stick", "key" and "gun" on the Cayley tree."""

from .certify import CertificationReport, certify, certify_gun, certify_key, certify_stick, sweep
from .model import ModelParams, StateGraph, params_from_a, params_from_lambda, preset_graph
from .recursion import BoundaryLaw, ti_map

__all__ = [
    "BoundaryLaw", "CertificationReport", "ModelParams", "StateGraph",
    "certify", "certify_gun", "certify_key", "certify_stick",
    "params_from_a", "params_from_lambda", "preset_graph", "sweep", "ti_map",
]
