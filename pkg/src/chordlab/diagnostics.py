"""Warning categories and small shared diagnostics helpers.

Numerical trouble is reported two ways at once: a Python warning of the
matching category (so pytest.warns and -W filters work), and, for operations
that return a result record, a plain-string entry appended to the record's
``warnings`` list so batch runs can serialize what happened.
"""

from __future__ import annotations

import warnings

__all__ = [
    "GridDomainWarning",
    "ConvergenceWarning",
    "TruncationWarning",
    "report",
]


class GridDomainWarning(UserWarning):
    """Grid too small for the field it carries (boundary not decayed)."""


class ConvergenceWarning(UserWarning):
    """Step or sample refinement changed the answer more than tolerated."""


class TruncationWarning(UserWarning):
    """A tail or basis truncation is visibly biting."""


def report(sink, message: str, category=UserWarning, stacklevel: int = 3):
    """Warn and, when ``sink`` is a list, record the message there too."""
    warnings.warn(message, category, stacklevel=stacklevel)
    if sink is not None:
        sink.append(message)
