class BespalError(Exception):
    """Base class for every error the engine raises on purpose."""


class FormulaSyntaxError(BespalError, ValueError):
    def __init__(self, message, text, offset, expected=()):
        self.text = text
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class UniverseError(BespalError, ValueError):
    pass


class KripkeModelError(BespalError, ValueError):
    pass


class TranslationError(BespalError):
    pass


class BudgetExceeded(BespalError):
    pass


class SaturationError(BespalError):
    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class UpdatePreconditionError(BespalError):
    pass


class UpdateVerificationError(BespalError):
    def __init__(self, message, reports=None):
        self.reports = reports or {}
        super().__init__(message)


class VerdictMismatch(BespalError):
    def __init__(self, message, mismatches=()):
        self.mismatches = list(mismatches)
        super().__init__(message)
