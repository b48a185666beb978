from .validation import (
    check_dimension,
    check_lambda,
    check_points,
    check_positive,
    check_samples,
)

__all__ = [
    "check_dimension",
    "check_lambda",
    "check_points",
    "check_positive",
    "check_samples",
]
