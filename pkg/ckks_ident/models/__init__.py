"""
ckks-ident Models
"""

from .report import ParamReport, Verdict
from .record import IterationRecord, csv_header

__all__ = ['ParamReport', 'Verdict', 'IterationRecord', 'csv_header']
