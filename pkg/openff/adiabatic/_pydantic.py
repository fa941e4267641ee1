try:
    from pydantic.v1 import (
        BaseModel,
        Extra,
        Field,
        NonNegativeFloat,
        PositiveFloat,
        PositiveInt,
        ValidationError,
        conint,
        root_validator,
        validator,
    )
except ModuleNotFoundError:
    from pydantic import (
        BaseModel,
        Extra,
        Field,
        NonNegativeFloat,
        PositiveFloat,
        PositiveInt,
        ValidationError,
        conint,
        root_validator,
        validator,
    )
