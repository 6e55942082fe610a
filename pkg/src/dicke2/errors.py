"""Exceptions raised by the solver."""


class Dicke2Error(Exception):
    pass


class PoleError(Dicke2Error):
    kind = "pole"

    def __init__(self, n: int, location: float, energy: float):
        self.n = n
        self.location = location
        self.energy = energy
        super().__init__(
            f"{self.kind} pole n={n} at E={location:.12g} (requested E={energy:.12g})"
        )


class SingletPole(PoleError):
    """E sits on a parity-matched integer, where b_n blows up."""

    kind = "singlet"


class DisplacedPole(PoleError):
    """E sits on n - g^2, where u_n blows up."""

    kind = "displaced"


class NoConvergence(Dicke2Error):
    """A series did not reach its tolerance within the term cap.

    The best available estimate is kept on the exception so callers can
    still inspect it.
    """

    def __init__(self, terms_cap: int, estimate: float = float("nan"),
                 error: float = float("inf"), what: str = "series"):
        self.terms_cap = terms_cap
        self.estimate = estimate
        self.error = error
        super().__init__(
            f"{what} not converged within {terms_cap} terms "
            f"(estimate {estimate:.6g}, error {error:.3g})"
        )


class IterationLimit(Dicke2Error):
    pass


class Unclassified(Dicke2Error):
    def __init__(self, expectation: float):
        self.expectation = expectation
        super().__init__(f"parity expectation {expectation:.6f} below 0.999 in magnitude")
