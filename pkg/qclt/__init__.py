"""qclt: Monte Carlo rates of normal approximation for M-estimators"""

__version__ = "0.1.0"
__tool_name__ = "qclt"
