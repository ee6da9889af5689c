"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the command line
front end can report structured failures.
"""


class SigmaKError(Exception):
    code = "ERROR"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"code": self.code, "message": str(self)}
        for key, val in self.details.items():
            out[key] = _plain(val)
        return out


def _plain(val):
    try:
        return val.tolist()
    except AttributeError:
        return val


class ConeViolation(SigmaKError):
    """Eigenvalues left the admissible cone; ``nodes`` lists the offenders."""

    code = "CONE_VIOLATION"


class NonPositiveValue(SigmaKError):
    code = "NONPOSITIVE_VALUE"


class DomainError(SigmaKError):
    code = "DOMAIN"


class SingularCenter(DomainError):
    code = "SINGULAR_CENTER"


class ConeExit(SigmaKError):
    code = "CONE_EXIT"


class SingularJacobian(SigmaKError):
    code = "SINGULAR_JACOBIAN"


class MaxIterations(SigmaKError):
    code = "MAX_ITER"


class ContinuationStall(SigmaKError):
    code = "CONTINUATION_STALL"


class TailConditionError(SigmaKError):
    code = "TAIL_CONDITION"


class NotTouching(SigmaKError):
    code = "NOT_TOUCHING"


class NotFound(SigmaKError):
    code = "NOT_FOUND"
