"""
DCLED - Bench and Game Schemas
Machine-readable reports emitted by the CLI.
"""

from pydantic import Field

from app.models.store_record import SchemeTag
from app.schemas.common import BaseSchema


class BenchRow(BaseSchema):
    """Median timings for one (scheme, n) cell of the grid."""

    scheme: SchemeTag
    n: int = Field(ge=1)
    quadratic_terms: int
    linear_terms: int
    eval1_seconds: float
    eval2_seconds: float
    dec_seconds: float
    repetitions: int = Field(ge=1)
    correct: bool
    seed: int
    hardware: str = ""


class BenchReport(BaseSchema):
    rows: list[BenchRow] = Field(default_factory=list)
    # Linear fit of dec_seconds against the program term count, per scheme.
    dec_fit_r2: dict[str, float] = Field(default_factory=dict)


class QueueReport(BaseSchema):
    """Mean completion latency of t identical requests at one worker."""

    scheme: SchemeTag
    mode: str
    t: int = Field(ge=1)
    n: int = Field(ge=1)
    service_seconds: float
    mean_wait_seconds: float


class GameReport(BaseSchema):
    """Outcome of the verifiable two-server forgery game."""

    trials: int
    acceptances: int
    rejections: int
    seed: int
    queries: int
    type1_trials: int
    type2_trials: int
    type1_acceptances: int
    type2_acceptances: int
    modulus_bits: int
    analytic_bound: float
