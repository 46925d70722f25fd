"""Exception hierarchy.

Every error carries a short machine-readable ``code`` and the CLI exit status
it maps to (2 for configuration problems, 3 for numerical failures).
"""


class MultitimeError(Exception):
    code = "error"
    exit_status = 3


class ConfigError(MultitimeError):
    code = "config_error"
    exit_status = 2


class NumericError(MultitimeError):
    code = "numeric_error"
    exit_status = 3


class SingularPoint(NumericError):
    code = "singular_point"


class OutOfDomain(SingularPoint):
    code = "out_of_domain"


class SingularStencil(NumericError):
    code = "singular_stencil"


class UnsupportedOrder(NumericError):
    code = "unsupported_order"


class BadRange(ConfigError):
    code = "bad_range"


class BadParameter(ConfigError):
    code = "bad_parameter"


class MissingCoefficient(ConfigError):
    code = "missing_coefficient"


class UnsupportedForm(ConfigError):
    code = "unsupported_form"


class CoefficientVanishes(NumericError):
    code = "coefficient_vanishes"


class DegenerateTransform(NumericError):
    code = "degenerate_transform"


class CertificationError(NumericError):
    code = "certification_failed"


class EmptyGrid(NumericError):
    code = "empty_grid"


class BlowUp(NumericError):
    code = "blow_up"


class NoConnection(NumericError):
    code = "no_connection"


class StabilityViolation(NumericError):
    code = "stability_violation"


class NonFinite(NumericError):
    code = "non_finite"


class LevelNotCrossed(NumericError):
    code = "level_not_crossed"
