from pydantic import BaseModel, Field, field_validator, model_validator
from typing import List, Optional, Literal, Tuple

DEFAULT_LAMBDA_GRID = [0.01, 0.02, 0.03, 0.04, 0.05] + [round(0.05 * i, 2) for i in range(2, 20)]


class HybridConfig(BaseModel):
    method: Literal["plr", "nbm", "hybrid"] = Field(
        "hybrid",
        description="'plr' pins the NBM weight to 0, 'nbm' pins it to 1, 'hybrid' uses the logistic weight."
    )
    heuristic: Literal["completion", "completion-subgoal", "uniqueness"] = Field(
        "completion", description="Landmark heuristic used for the PLR scores."
    )
    a: float = Field(0.7, ge=0.0, le=1.0, description="Asymptote of the logistic NBM weight.")
    b: float = Field(0.45, ge=0.0, description="Steepness of the logistic NBM weight.")
    c: float = Field(11.5, description="Midpoint (training-set size) of the logistic NBM weight.")
    n: int = Field(0, ge=0, description="Training-set size the NBM was trained on.")
    nbm_weight: Optional[float] = Field(
        None, ge=0.0, le=1.0, description="Pins w_NBM to this value, overriding method and logistic weight."
    )
    use_init_landmarks: bool = Field(False, description="Count initial-state landmarks (ablation).")


class ExperimentConfig(BaseModel):
    hybrid: HybridConfig = Field(default_factory=HybridConfig)
    alpha: float = Field(1.0, gt=0.0, description="Laplace pseudo-count for NBM training.")
    lambda_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_LAMBDA_GRID),
                                     description="Fractions of observations at which accuracy is measured.")
    workers: Optional[int] = Field(None, ge=1, description="Threads for landmark verification.")

    @field_validator("lambda_grid")
    @classmethod
    def _check_grid(cls, grid):
        if not grid:
            raise ValueError("lambda grid is empty")
        for value in grid:
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"lambda {value} outside [0, 1]")
        return grid


class Fold(BaseModel):
    train: List[int] = Field(..., description="Dataset indices used to train the NBM.")
    validation: List[int] = Field(..., description="Dataset indices evaluated online.")


class CvPlan(BaseModel):
    n: int = Field(..., ge=1, description="Training-set size of every fold.")
    k: int = Field(..., ge=1, description="Number of full partitions, floor(|D| / n).")
    folds: List[Fold]
    seed: int

    @model_validator(mode="after")
    def _check_folds(self):
        for fold in self.folds:
            if len(fold.train) != self.n:
                raise ValueError(f"fold trains on {len(fold.train)} sequences, expected {self.n}")
            if set(fold.train) & set(fold.validation):
                raise ValueError("training and validation indices overlap")
        return self


class AccuracyRow(BaseModel):
    method: str
    n: int
    lam: float = Field(..., alias="lambda", ge=0.0, le=1.0)
    accuracy: float = Field(..., ge=0.0, le=1.0)
    folds: int
    seed: int

    model_config = {"populate_by_name": True}


class GridSpec(BaseModel):
    layout: str = Field(..., description="Whitespace-separated cell names per row; '.' marks no cell.")
    doors: List[Tuple[str, str]] = Field(
        default_factory=list, description="Adjacent cell pairs of different rooms that are connected."
    )
    init: str = Field(..., description="Start cell of the agent.")
    goals: List[str] = Field(..., min_length=1, description="Goal cells, one hypothesis each.")
