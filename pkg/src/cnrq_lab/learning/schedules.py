from dataclasses import dataclass


@dataclass(frozen=True)
class StepSchedules:
    """Power-law step sizes n^-p for the fast (gamma), middle (alpha) and slow (beta) recursions.

    Exponents must lie in (0.5, 1] so that every sequence sums to infinity
    while its square sums, and must increase from fast to slow so that
    alpha/gamma and beta/alpha vanish.
    """

    gamma_exponent: float = 0.52
    alpha_exponent: float = 0.70
    beta_exponent: float = 0.88

    def __post_init__(self):
        exponents = (self.gamma_exponent, self.alpha_exponent, self.beta_exponent)
        for name, p in zip(("gamma", "alpha", "beta"), exponents):
            if not 0.5 < p <= 1.0:
                raise ValueError(f"{name} exponent must lie in (0.5, 1], got {p}")
        if not self.gamma_exponent < self.alpha_exponent < self.beta_exponent:
            raise ValueError(
                f"Exponents must increase from fast to slow, got gamma={self.gamma_exponent} "
                f"alpha={self.alpha_exponent} beta={self.beta_exponent}"
            )

    @staticmethod
    def _power(n: int, exponent: float) -> float:
        if n < 1:
            raise ValueError(f"Step counters start at 1, got {n}")
        return float(n) ** -exponent

    def gamma(self, n: int) -> float:
        return self._power(n, self.gamma_exponent)

    def alpha(self, n: int) -> float:
        return self._power(n, self.alpha_exponent)

    def beta(self, n: int) -> float:
        return self._power(n, self.beta_exponent)

    def ratios(self, n: int) -> tuple[float, float]:
        """(alpha(n)/gamma(n), beta(n)/alpha(n))."""
        return self.alpha(n) / self.gamma(n), self.beta(n) / self.alpha(n)
