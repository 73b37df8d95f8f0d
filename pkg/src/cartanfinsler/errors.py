"""Error taxonomy shared by every module.

Three failure classes cover the whole library: malformed values
(shape/symmetry), mathematical-domain violations (a point outside its domain,
a matrix that is not positive definite), and numerical breakdowns
(non-convergence, boundary ill-conditioning).
"""


class StructureError(ValueError):
    """Input has the wrong shape, symmetry class, or descriptor fields."""


class DomainError(ValueError):
    """Input is structurally fine but violates a mathematical precondition."""


class NumericError(RuntimeError):
    """An iterative or finite-precision computation failed to converge."""


class ConfigError(ValueError):
    """A run configuration failed validation; carries field-level messages."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
