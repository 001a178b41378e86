"""Error hierarchy shared by the library and the command line.

Every error carries a human readable ``detail`` and the ``exit_code`` the
command line returns when the error reaches it.
"""
from typing import Optional


class SplineComplexError(Exception):
    exit_code: int = 2

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class KnotVectorError(SplineComplexError, ValueError):
    pass


class SpaceMismatchError(SplineComplexError, ValueError):
    pass


class EvaluationDomainError(SplineComplexError, ValueError):
    pass


class GeometryError(SplineComplexError):
    pass


class ConformityError(SplineComplexError):
    def __init__(self, detail: str, report=None):
        super().__init__(detail)
        self.report = report


class SingularGramError(SplineComplexError):
    pass


class ConfigError(SplineComplexError, ValueError):
    pass


class VerificationError(SplineComplexError):
    exit_code = 1
