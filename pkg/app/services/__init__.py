"""
DCLED - Services
"""

from app.services.scheme2s_service import TwoServerScheme
from app.services.scheme2v_service import VerifiableTwoServerScheme
from app.services.schemeds_service import MultiServerScheme
from app.services.store_service import ShareStore

__all__ = [
    "TwoServerScheme",
    "VerifiableTwoServerScheme",
    "MultiServerScheme",
    "ShareStore",
]
