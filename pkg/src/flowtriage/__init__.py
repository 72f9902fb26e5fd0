"""Intrusion-detection triage workbench.

Trains tree-based classifiers on labeled network-flow data, explains every
prediction with exact TreeSHAP values, compares instance explanations against
TP/TN/FP/FN cohort profiles, and routes suspect predictions to an analyst
review service.
"""

__version__ = "0.1.0"

from .data import BalancePolicy, FlowTable, SplitSpec  # noqa: F401
from .trees import TreeEnsemble  # noqa: F401
