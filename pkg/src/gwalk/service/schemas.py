"""Request models for the service endpoints.

Groupoid, operator, and certificate payloads stay free-form dicts here;
their shapes are validated by the JSON spec layer, which is the single
source of truth for those formats.
"""

from typing import Optional

from pydantic import BaseModel

from ..corpus import DEFAULT_SEED


class ClassifyRequest(BaseModel):
    groupoid: dict
    budgets: Optional[dict] = None
    operator: Optional[list] = None  # cross-check operator on the same groupoid


class LiouvilleRequest(BaseModel):
    groupoid: dict
    operator: list
    units: Optional[list[int]] = None
    fiber_cap: int = 100_000


class HittingRequest(BaseModel):
    groupoid: dict
    operator: list
    unit: int = 0
    mode: str = "exact"
    horizon: Optional[int] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    max_steps: int = 1000


class WalkRequest(BaseModel):
    groupoid: dict
    operator: list
    unit: int = 0
    length: int
    seed: int


class FcTowerRequest(BaseModel):
    group: dict
    ball_radius: int = 4
    class_budget: int = 64
    max_levels: int = 8


class ConstructRequest(BaseModel):
    group: dict
    epsilon: str = "1/16"
    depth: int = 4
    identity_levels: int = 1
    search_budget: int = 256
    p: Optional[dict[str, str]] = None


class VerifyRequest(BaseModel):
    certificate: dict


class CorpusRequest(BaseModel):
    seed: int = DEFAULT_SEED
    relations: int = 100
    finite_fiber: bool = True
    forced_return: bool = True
