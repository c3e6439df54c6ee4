"""Exception hierarchy shared by the solver modules."""


class EPAnnulusError(Exception):
    """Base class for all solver errors."""


class ConfigError(EPAnnulusError):
    pass


class CompatibilityError(ConfigError):
    """Boundary data violates a wall compatibility condition."""


class SolverError(EPAnnulusError):
    """Numerical failure; the CLI maps these to exit code 3."""


class RadialSonicDegeneracy(SolverError):
    pass


class NonPositiveDensity(SolverError):
    pass


class BackgroundBlowUp(SolverError):
    """The radial ODE state left the finite range before r1."""


class MultipleCrossings(SolverError):
    pass


class NotEnoughNodes(SolverError):
    pass


class DegenerateRadialVelocity(SolverError):
    pass


class VacuumState(SolverError):
    pass


class OddExtensionMismatch(SolverError):
    pass


class SingularSystem(SolverError):
    pass


class IterativeNoConvergence(SolverError):
    pass


class TrustRegionExceeded(SolverError):
    pass


class NoContraction(SolverError):
    pass


class MaxIterExceeded(SolverError):
    pass
