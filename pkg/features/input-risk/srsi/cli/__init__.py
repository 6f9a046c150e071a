"""
CLI interface for risk set inference experiments.
"""

from .commands import main

__all__ = ['main']
