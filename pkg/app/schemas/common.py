"""
DCLED - Common Schemas
"""

from typing import Annotated

from pydantic import BaseModel, ConfigDict, StringConstraints


class BaseSchema(BaseModel):
    """Base schema with common configuration."""

    model_config = ConfigDict(
        from_attributes=True,
        populate_by_name=True,
        str_strip_whitespace=True,
    )


# Lowercase hex; the fixed width is checked against SchemeParams on decode.
HexString = Annotated[str, StringConstraints(pattern=r"^[0-9a-f]*$", to_lower=True)]
