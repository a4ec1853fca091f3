"""
DCLED - Domain Models
"""

from app.models.program import LinTerm, MonomialProgram, QuadraticProgram, QuadTerm, compose
from app.models.shares import (
    Share1,
    Share2,
    ShareMatrix,
    ShareMatrixRow,
    ShareType,
    TagPolynomial,
    VShare1,
    VShare2,
)
from app.models.store_record import SchemeTag, StoreRecord

__all__ = [
    "LinTerm",
    "MonomialProgram",
    "QuadraticProgram",
    "QuadTerm",
    "compose",
    "Share1",
    "Share2",
    "ShareMatrix",
    "ShareMatrixRow",
    "ShareType",
    "TagPolynomial",
    "VShare1",
    "VShare2",
    "SchemeTag",
    "StoreRecord",
]
