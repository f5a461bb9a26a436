"""
USIM-DAL Lab Package

This package contains modules for:
- Statistical image models and synthetic dataset generation
- Probabilistic super-resolution network with a minimal autodiff engine
- Uncertainty-driven active learning and experiment harness
"""

__version__ = "1.0.0"
__author__ = "MLOps Training Team"
