"""Exception hierarchy shared by the partition_linf modules."""

from typing import Optional


class PartitionLinfError(Exception):
    """Base class for every error raised by the toolkit."""


class FieldError(PartitionLinfError, ValueError):
    """Prime-field misuse: non-prime modulus, mixed moduli, division by zero."""


class ShapeError(PartitionLinfError, ValueError):
    """Size, arity, index or tree-shape mismatch."""


class CapExceededError(PartitionLinfError):
    """
    An enumeration would exceed the configured cap.

    Logic:
    - `needed` is the size the enumeration would reach (or a lower bound on it).
    - `limit` is the cap in force; the CLI maps this error to exit code 3.
    """

    def __init__(self, what: str, needed: int, limit: int):
        self.what = what
        self.needed = needed
        self.limit = limit
        super().__init__(
            f"{what}: {needed} candidates exceed the cap of {limit}. "
            "Use a smaller example or raise --cap."
        )


class PresentationError(PartitionLinfError, ValueError):
    """A JSON presentation could not be parsed or does not match the schema."""

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        super().__init__(f"{message} (at {location})" if location else message)


class NotMaurerCartanError(PartitionLinfError, ValueError):
    """A gauge endpoint is not a Maurer-Cartan element."""

    def __init__(self, endpoint: str):
        self.endpoint = endpoint
        super().__init__(f"{endpoint} is not a Maurer-Cartan element")
