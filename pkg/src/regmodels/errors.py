"""Error taxonomy shared across the package.

Each family maps to a distinct CLI exit code; see `regmodels.cli`.
"""


class RegModelsError(Exception):
    """Base class for all package errors."""


class ParseError(RegModelsError):
    """Malformed job specification or input polynomial."""

    exit_code = 2


class PrecisionExhausted(RegModelsError):
    """A computation needed valuation information beyond the precision cap."""

    exit_code = 3


class UnsupportedGeometry(RegModelsError):
    """Input left the supported shape (non-hypersurface chart, curve centre,
    residue characteristic 2, ...)."""

    exit_code = 4


class BudgetExhausted(RegModelsError):
    """A step/retry/degree budget was reached before completion."""

    exit_code = 5


class ShapeMismatch(RegModelsError):
    """Two objects that must share a chart skeleton do not."""

    exit_code = 4


class PointNotOnModel(RegModelsError):
    exit_code = 4


class CertificateNotFound(RegModelsError):
    """No pi-power below the precision cap could be certified."""

    exit_code = 3


class DegreeBoundExceeded(BudgetExhausted):
    """A closed point or factor needs residue degree above the configured bound."""


class StepBudgetExhausted(BudgetExhausted):
    """resolve() hit max_steps before reaching a regular surface."""


class ResampleBudgetExhausted(BudgetExhausted):
    """perturb() could not find an admissible perturbation."""


class DisconnectedFibre(RegModelsError):
    exit_code = 4


class MembershipUndecidable(RegModelsError):
    """Ideal membership cannot be decided without caller-provided cofactors."""

    exit_code = 4
