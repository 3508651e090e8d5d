"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1, data
problems exit 2, numeric divergence exits 3.
"""


class ConfigError(Exception):
    """Bad configuration: unknown option values, inconsistent run settings."""


class DataError(Exception):
    """Bad input data: empty datasets, out-of-scale ratings, shape mismatches."""


class LineParseError(DataError):
    """A malformed line or row in a ratings file."""

    def __init__(self, line_no: int, text: str, reason: str):
        self.line_no = line_no
        self.text = text
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}: {text!r}")


class DivergenceError(Exception):
    """Training produced non-finite parameters; a smaller learning rate usually helps."""
