"""
Core package: dense linear algebra, the error hierarchy, typed operations,
seeded sampling and the JSON value codec.
"""

from core.exceptions import (
    AntidistError,
    CapabilityError,
    DimensionMismatchError,
    InvalidParameterError,
    NonConvergenceError,
    NotHermitianError,
    SchemaError,
)

__all__ = [
    'AntidistError',
    'CapabilityError',
    'DimensionMismatchError',
    'InvalidParameterError',
    'NonConvergenceError',
    'NotHermitianError',
    'SchemaError',
]
