"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: configuration problems exit 2, data and
format problems exit 3, numerical failures exit 4.
"""


class SpleError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(SpleError):
    """Invalid knob values: bad counts, fractions outside [0,1], k too large."""


class SizeError(ConfigurationError):
    """A requested selection exceeds what the corpus can provide."""


class TemplateError(ConfigurationError):
    """A supposition pattern references a placeholder with no binding."""


class DataFormatError(SpleError):
    """A record or corpus file is structurally malformed."""


class DataIntegrityError(SpleError):
    """A file parsed cleanly but violates set-level invariants."""


class NumericalError(SpleError):
    """Non-finite values where finite ones are required (e.g. training loss)."""


class DegenerateScoreError(NumericalError):
    """Entail and contradict mass are both zero; True/False odds undefined."""
