"""Jaynes-Cummings and Tavis-Cummings dynamics on a simulated qubit register.

Three propagators are compared against an exact oracle: first-order
Trotterisation, incremental structured learning (ISL) and McLachlan
variational simulation (VQS).
"""
from .isl import IslConfig, evolve_isl
from .models import Model, ModelSpec, encode
from .trajectory import Measurement, Trajectory
from .trotter import evolve_trotter
from .vqs import AnsatzSpec, evolve_vqs

__all__ = [
    "AnsatzSpec", "IslConfig", "Measurement", "Model", "ModelSpec", "Trajectory",
    "encode", "evolve_isl", "evolve_trotter", "evolve_vqs",
]
__version__ = "0.1.0"
