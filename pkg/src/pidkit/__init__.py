"""Bivariate partial information decompositions: deficiency-based, joint-distribution,
Lagrangian and extraction-based variants, with Blackwell-order and decision-risk tools."""
__version__ = "0.1.0"

from .atoms import PidAtoms, assemble_from_ri, validate
from .blackwell import lecam_deficiency, lambda_matrices, sufficiency_discrete, sufficiency_gaussian
from .broja import symmetry_check, tilde_pid, tilde_ui
from .config import SolverConfig
from .delta import cyan_region, deficiency, delta_pid
from .ipid import info_deficiency_discrete, info_deficiency_gaussian, ipid
from .lagrangian import delta_lambda, lambda_sweep
from .prob import Channel, DiscreteTriple, GaussianTriple, InfoValue, mutual_information
from .risk import LossTable, average_risk, bayes_rule, risk_gap_audit

__all__ = [
    "PidAtoms", "assemble_from_ri", "validate",
    "lecam_deficiency", "lambda_matrices", "sufficiency_discrete", "sufficiency_gaussian",
    "symmetry_check", "tilde_pid", "tilde_ui",
    "SolverConfig",
    "cyan_region", "deficiency", "delta_pid",
    "info_deficiency_discrete", "info_deficiency_gaussian", "ipid",
    "delta_lambda", "lambda_sweep",
    "Channel", "DiscreteTriple", "GaussianTriple", "InfoValue", "mutual_information",
    "LossTable", "average_risk", "bayes_rule", "risk_gap_audit",
]
