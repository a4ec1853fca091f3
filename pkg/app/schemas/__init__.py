"""
DCLED - Pydantic Schemas
"""

from app.schemas.bench import BenchReport, BenchRow, GameReport, QueueReport
from app.schemas.common import BaseSchema
from app.schemas.dataset import DataRow, ProgramFile
from app.schemas.wire import (
    AckFrame,
    ErrorFrame,
    EvalFrame,
    PingFrame,
    PongFrame,
    ProgramPayload,
    ResultFrame,
    StoreFrame,
)

__all__ = [
    "BenchReport",
    "BenchRow",
    "GameReport",
    "QueueReport",
    "BaseSchema",
    "DataRow",
    "ProgramFile",
    "AckFrame",
    "ErrorFrame",
    "EvalFrame",
    "PingFrame",
    "PongFrame",
    "ProgramPayload",
    "ResultFrame",
    "StoreFrame",
]
