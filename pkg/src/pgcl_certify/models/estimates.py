"""Monte Carlo estimate models."""

from pydantic import BaseModel, Field


class Estimate(BaseModel):
    """Sample mean with standard error, reproducible from ``seed``.

    Non-finite means serialize as ``null`` in JSON.
    """

    mean: float = Field(..., description="Sample mean")
    stderr: float = Field(..., ge=0.0, description="Sample standard deviation / sqrt(n)")
    n_samples: int = Field(..., ge=1)
    nonterminated_fraction: float = Field(..., ge=0.0, le=1.0)
    seed: int = Field(..., ge=0)
    step_cap: int = Field(..., ge=1)

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "mean": 0.998,
                    "stderr": 0.0045,
                    "n_samples": 100000,
                    "nonterminated_fraction": 0.0,
                    "seed": 12648430,
                    "step_cap": 10000,
                }
            ]
        }
    }

    def within(self, target: float, sigmas: float = 3.0, slack: float = 1e-12) -> bool:
        """Whether ``target`` lies within ``sigmas`` standard errors of the mean."""
        return abs(self.mean - target) <= sigmas * self.stderr + slack


class LoopingTimeEstimate(Estimate):
    """Looping-time statistics over the terminating runs."""

    max_observed: int | None = Field(default=None, description="Largest looping time seen")
    terminated_samples: int = Field(default=0, ge=0)
