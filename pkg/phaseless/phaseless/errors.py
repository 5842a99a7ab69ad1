"""
Exceptions raised by the phaseless toolkit.

Every exception carries the process exit code the command line maps it to.
"""


class PhaselessError(Exception):
    exit_code = 1


class InvalidInput(PhaselessError, ValueError):
    "arguments or data that violate a documented precondition"
    exit_code = 2


class ConfigError(InvalidInput):
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__('; '.join(self.errors))


class FieldFormatError(InvalidInput):
    pass


class NumericalFailure(PhaselessError):
    exit_code = 3

    def __init__(self, message, stage=None):
        self.stage = stage
        if stage:
            message = '[%s] %s' % (stage, message)
        super().__init__(message)


class ResolutionError(NumericalFailure):
    def __init__(self, message):
        super().__init__(message, stage='resolution')


class SolverFailure(NumericalFailure):
    pass


class ResourceRefusal(PhaselessError):
    exit_code = 4

    def __init__(self, estimated_bytes, budget_bytes, what='grid'):
        self.estimated_bytes = int(estimated_bytes)
        self.budget_bytes = int(budget_bytes)
        super().__init__(
            '%s needs an estimated %d bytes (%.1f GiB), over the memory budget of %d bytes (%.1f GiB)' % (
                what, self.estimated_bytes, self.estimated_bytes / 2 ** 30,
                self.budget_bytes, self.budget_bytes / 2 ** 30))
