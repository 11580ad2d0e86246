from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt

from unikey.options import BoundsOptions, SolverOptions

OutputFormat = Literal["table", "json"]


class RunConfig(BaseModel):
    """Global command-line settings shared by every subcommand.

    Attributes:
        tolerance (float): Target optimality gap of UI computations, in bits.
        restarts (int): Random restarts of the key-rate bound searches.
        seed (int): Seed of every randomized search.
        max_iters (int): Frank-Wolfe iteration cap.
        output_format (str): ``table`` or ``json``.
        max_evals (int): Objective budget of the nested-UI bound searches.
        workers (int): Threads for independent restarts.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    tolerance: PositiveFloat = 1e-6
    restarts: PositiveInt = 20
    seed: int = Field(default=0, ge=0, lt=2**64)
    max_iters: PositiveInt = 10_000
    output_format: OutputFormat = "table"
    max_evals: PositiveInt = 200
    workers: PositiveInt = 1

    def to_solver_options(self) -> SolverOptions:
        """Settings for the unique-information solvers."""
        return SolverOptions(
            tolerance=self.tolerance,
            max_iters=self.max_iters,
            seed=self.seed,
            workers=self.workers,
        )

    def to_bounds_options(self) -> BoundsOptions:
        """Settings for the key-rate bound searches, embedding :meth:`to_solver_options`."""
        return BoundsOptions(
            restarts=self.restarts,
            seed=self.seed,
            max_evals=self.max_evals,
            workers=self.workers,
            ui=self.to_solver_options(),
        )
