"""Validated solver and bound-search settings."""

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt


class SolverOptions(BaseModel):
    """Settings for the unique-information solvers.

    Attributes:
        tolerance (float): Target certified optimality gap in bits.
        max_iters (int): Frank-Wolfe iteration cap.
        line_search_steps (int): Bisection steps of the exact line search.
        smoothing (float): Weight of the uniform table mixed in before taking logarithms.
        away_steps (bool): Allow away steps towards dropping active vertices.
        starts (int): Number of oracle starts.
        seed (int): Seed for the oracle's random starts.
        oracle_max_iters (int): Per-start iteration cap of the oracle.
        workers (int): Threads used for independent oracle starts.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    tolerance: PositiveFloat = 1e-6
    max_iters: PositiveInt = 10_000
    line_search_steps: PositiveInt = 20
    smoothing: float = Field(default=1e-12, gt=0.0, lt=1e-3)
    away_steps: bool = True
    starts: PositiveInt = 16
    seed: int = Field(default=0, ge=0, lt=2**64)
    oracle_max_iters: PositiveInt = 20_000
    workers: PositiveInt = 1


class BoundsOptions(BaseModel):
    """Settings for the nonconvex secret-key-rate bound searches.

    ``z_prime_size`` overrides the auxiliary alphabet size of the B1 and
    nested-UI searches, which defaults to ``|S||Y||Z|``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    restarts: PositiveInt = 20
    max_steps: PositiveInt = 2000
    min_step: PositiveFloat = 1e-9
    seed: int = Field(default=0, ge=0, lt=2**64)
    max_evals: PositiveInt = 200
    z_prime_size: PositiveInt | None = None
    u_cap: PositiveInt = 2
    workers: PositiveInt = 1
    ui: SolverOptions = SolverOptions()
