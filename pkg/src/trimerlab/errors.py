"""Exception types shared across the solvers."""

from __future__ import annotations


class TrimerlabError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(TrimerlabError):
    """Invalid model configuration or operation parameters."""


class SingularInputError(TrimerlabError):
    """Evaluation at a point where the pure potential is singular."""


class UnsupportedSectorError(TrimerlabError):
    """Symmetry sector outside what the requested solver supports."""


class MeshResolutionError(TrimerlabError):
    """Angular mesh cannot resolve the regularized coincidence region."""


class DomainTooSmallError(TrimerlabError):
    """Radial domain cannot contain the requested level's outer turning point."""


class TableRangeError(TrimerlabError):
    """Evaluation of a tabulated potential outside its validated range."""


class FitWindowError(TrimerlabError):
    """Fit window violates a precondition (sign, width, or asymptotic reach)."""


class RadicandError(TrimerlabError):
    """A square-root argument in a model form went nonpositive."""


class RelabelingError(TrimerlabError):
    """Channel overlap too small to align phases across neighboring solves."""

    def __init__(self, message: str, r_crossing: float | None = None):
        super().__init__(message)
        self.r_crossing = r_crossing


class ConvergenceError(TrimerlabError):
    """A solver failed to converge; carries diagnostics for post-mortem."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
