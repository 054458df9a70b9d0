from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    cluster: float = 1e-7      # root multiplicity merging
    lin: float = 1e-9          # relative to matrix norm
    apparent: float = 1e-8     # relative to the t^-2 coefficient
    series: float = 1e-9
    moment: float = 1e-10      # scaled by max(1, |lambda d|)
    disc: float = 1e-8         # squarefree test on f
    rank: float = 1e-9         # singular value cut for rank decisions
    valuation: float = 1e-8    # relative cut for "numerically zero" coefficients
    poisson: float = 1e-4
    h_step: float = 1e-5
    truncation: int = 8

    def moment_tol(self, lam_d: complex) -> float:
        return self.moment * max(1.0, abs(lam_d))

    def updated(self, **kw) -> "Tolerances":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


DEFAULT_TOL = Tolerances()
