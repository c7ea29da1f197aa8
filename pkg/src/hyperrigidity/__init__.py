"""Hyperrigidity of C*-correspondences over finite-dimensional algebras and discrete graphs.

The structural test checks whether the Katsura ideal acts non-degenerately,
``J_X . X = X``; :func:`repcert.certificate` confirms each verdict numerically
with a shift dilation of a truncated Fock representation.
"""
from .correspondence import Correspondence, HyperrigidityVerdict, is_hyperrigid, katsura_ideal, kernel_of_lambda
from .cstar import AlgebraElement, Ideal, MultiMatrixAlgebra
from .graph import INF, Multigraph
from .hilbmod import Frame, HilbertModule, ModuleElement, ModuleOperator
from .repcert import CertificateReport, certificate, fock_rep

__all__ = [
    "AlgebraElement",
    "CertificateReport",
    "Correspondence",
    "Frame",
    "HilbertModule",
    "HyperrigidityVerdict",
    "INF",
    "Ideal",
    "ModuleElement",
    "ModuleOperator",
    "Multigraph",
    "MultiMatrixAlgebra",
    "certificate",
    "fock_rep",
    "is_hyperrigid",
    "katsura_ideal",
    "kernel_of_lambda",
]
