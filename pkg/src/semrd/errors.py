"""Exception types shared across the toolkit.

Everything derives from ValueError so callers who do not care about the
distinction can catch one thing; the CLI maps them all to exit code 1.
"""


class SchemaError(ValueError):
    """A network file does not conform to the documented JSON schema."""


class InvalidStateError(ValueError):
    """A state index is outside a variable's cardinality range."""


class SizeGuardError(ValueError):
    """A dense table would exceed the configured size guard."""


class UncodableSampleError(ValueError):
    """A sample contains a state with zero probability under its codebook."""


class WrongCodebookError(ValueError):
    """A bitstream's network digest does not match the decoding codebook."""


class CorruptStreamError(ValueError):
    """A bitstream is truncated, malformed, or carries trailing data."""
