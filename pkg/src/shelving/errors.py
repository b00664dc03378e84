"""Exception hierarchy shared by all modules."""


class ShelvingError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrix(ShelvingError):
    pass


class NoConvergence(ShelvingError):
    pass


class DegenerateSystem(ShelvingError):
    """Steady state or normalization is undefined (e.g. no driving)."""


class NoPeak(ShelvingError):
    pass


class NoSaddle(ShelvingError):
    """The optimal-detuning condition has no real solution."""


class InfiniteDarkPeriod(ShelvingError):
    pass


class InfiniteBrightPeriod(ShelvingError):
    pass


class DegenerateDressing(ShelvingError):
    pass


class AmbiguousModes(ShelvingError):
    """Secular modes are not separated enough to be told apart."""


class NoPeriods(ShelvingError):
    pass


class FitFailure(ShelvingError):
    pass
