"""
DCLED - Dataset and Program File Schemas

Data rows (CSV `label,value` or JSONL `{"label": ..., "value": ...}`) carry
values as decimal or 0x-hex. Program files are JSON:

    {"kind": "quadratic", "labels": ["a", "b"],
     "quad": [[1, 2, 3]], "lin": [[1, 5]], "gamma": 7}

    {"kind": "monomial", "labels": ["a", "b", "c"]}
"""

from typing import Annotated, Literal

from pydantic import BeforeValidator, Field

from app.core.exceptions import ParameterError
from app.core.field import FieldElement, SchemeParams
from app.core.prf import Label
from app.models.program import LinTerm, MonomialProgram, QuadraticProgram, QuadTerm
from app.schemas.common import BaseSchema


def _parse_int(value: object) -> object:
    if isinstance(value, str):
        try:
            return int(value.strip(), 0)
        except ValueError as exc:
            raise ValueError(f"{value!r} is not a decimal or 0x-hex integer") from exc
    return value


Integer = Annotated[int, BeforeValidator(_parse_int)]


class DataRow(BaseSchema):
    label: str = Field(min_length=1)
    value: Integer

    def to_item(self, params: SchemeParams) -> tuple[Label, FieldElement]:
        if not 0 <= self.value < params.p:
            raise ParameterError(f"value for {self.label} is not in [0, p)")
        return Label.of(self.label), FieldElement(self.value, params.p)


class ProgramFile(BaseSchema):
    kind: Literal["quadratic", "monomial"] = "quadratic"
    labels: list[str] = Field(default_factory=list)
    quad: list[tuple[int, int, Integer]] = Field(default_factory=list)
    lin: list[tuple[int, Integer]] = Field(default_factory=list)
    gamma: Integer = 0

    def to_program(self, params: SchemeParams) -> QuadraticProgram | MonomialProgram:
        labels = tuple(Label.of(lb) for lb in self.labels)
        if self.kind == "monomial":
            return MonomialProgram(labels)

        p = params.p
        return QuadraticProgram(
            params,
            labels,
            tuple(QuadTerm(i, j, FieldElement(alpha % p, p)) for i, j, alpha in self.quad),
            tuple(LinTerm(k, FieldElement(beta % p, p)) for k, beta in self.lin),
            FieldElement(self.gamma % p, p),
        )
