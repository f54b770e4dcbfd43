"""
QCStar Configuration Management
Centralized configuration with environment variable support and validation.
"""
import hashlib
import json
import os
from typing import Optional
from pydantic import BaseModel, Field, field_validator
from dotenv import load_dotenv

load_dotenv()

VERSION = "1.0.0"

PICTURES = ("hyperbolic", "rational")


class SpecialConfig(BaseModel):
    """Hyperbolic gamma evaluation settings"""
    quad_epsabs: float = Field(default=1e-13)
    quad_epsrel: float = Field(default=1e-12)
    quad_limit: int = Field(default=400)
    small_x_factor: float = Field(default=1e-2)  # Taylor cutoff, times min(b, 1/b)
    strip_margin: float = Field(default=0.95)  # direct evaluation if |Im z| < margin * eta
    pole_tol: float = Field(default=1e-12)
    max_shifts: int = Field(default=200)

    @field_validator("strip_margin")
    @classmethod
    def validate_margin(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("strip_margin must lie in (0, 1)")
        return v


class SolverConfig(BaseModel):
    """Stencil solver configuration"""
    tol: float = Field(default=1e-10)
    max_iter: int = Field(default=100)
    starts: int = Field(default=64)
    seed: int = Field(default=0)
    max_halvings: int = Field(default=30)
    fd_step: float = Field(default=1e-7)
    retry_attempts: int = Field(default=2)  # escalations after a failed multistart
    early_stop: Optional[int] = Field(default=None)

    @field_validator("tol")
    @classmethod
    def validate_tol(cls, v):
        if v <= 0:
            raise ValueError("tol must be positive")
        return v

    @field_validator("max_iter", "starts")
    @classmethod
    def validate_counts(cls, v):
        if v < 1:
            raise ValueError("iteration and start counts must be at least 1")
        return v


class LatticeConfig(BaseModel):
    """Lattice evolution configuration"""
    size: int = Field(default=8)
    ic: str = Field(default="corner")  # "corner" or "staircase"
    branch: str = Field(default="nearest")  # "nearest" or "indexed"
    branch_index: int = Field(default=0)
    u: tuple = Field(default=(1.9, 1.5))
    v: tuple = Field(default=(0.4, 0.2))

    @field_validator("ic")
    @classmethod
    def validate_ic(cls, v):
        if v not in ("corner", "staircase"):
            raise ValueError('ic must be "corner" or "staircase"')
        return v

    @field_validator("branch")
    @classmethod
    def validate_branch(cls, v):
        if v not in ("nearest", "indexed"):
            raise ValueError('branch must be "nearest" or "indexed"')
        return v

    @field_validator("size")
    @classmethod
    def validate_size(cls, v):
        if v < 4:
            raise ValueError("size must be at least 4")
        return v


class CafccConfig(BaseModel):
    """Consistency-around-a-face-centred-cube experiment configuration"""
    trials: int = Field(default=100)
    check_tol: float = Field(default=1e-6)
    prune_tol: float = Field(default=1e-3)
    angle_low: float = Field(default=0.1)
    angle_high: float = Field(default=1.0)
    failure_budget: int = Field(default=25)  # consecutive failures before a batch stops


class QuadratureConfig(BaseModel):
    """Star-star quadrature configuration"""
    radius_factor: float = Field(default=6.0)  # R = radius_factor * eta
    target: float = Field(default=1e-7)
    max_subdivisions: int = Field(default=200)
    tail_tol: float = Field(default=1e-12)
    max_radius_doublings: int = Field(default=4)
    expensive: bool = Field(default=False)


class OutputConfig(BaseModel):
    """Report output configuration"""
    out_dir: str = Field(default="out")
    path: Optional[str] = Field(default=None)  # report file; stdout when unset
    format: str = Field(default="json")
    deterministic: bool = Field(default=True)

    @field_validator("format")
    @classmethod
    def validate_format(cls, v):
        if v not in ("json", "csv"):
            raise ValueError('format must be "json" or "csv"')
        return v


class LoggingConfig(BaseModel):
    """Logging configuration"""
    level: str = Field(default="INFO")
    format: str = Field(default="%(asctime)s %(name)s %(levelname)s %(message)s")
    file_path: Optional[str] = Field(default="logs/qcstar.log")
    max_bytes: int = Field(default=10485760)  # 10MB
    backup_count: int = Field(default=5)


class Config(BaseModel):
    """Master configuration object"""
    special: SpecialConfig = Field(default_factory=SpecialConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    lattice: LatticeConfig = Field(default_factory=LatticeConfig)
    cafcc: CafccConfig = Field(default_factory=CafccConfig)
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)


class RunConfig(BaseModel):
    """Per-invocation settings of a CLI command, loaded from JSON and overridden by flags"""
    command: str
    n: int = Field(default=2)
    picture: str = Field(default="hyperbolic")
    b: float = Field(default=1.0)
    seed: int = Field(default=0)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    lattice: LatticeConfig = Field(default_factory=LatticeConfig)
    cafcc: CafccConfig = Field(default_factory=CafccConfig)
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    inputs: dict = Field(default_factory=dict)

    @field_validator("n")
    @classmethod
    def validate_n(cls, v):
        if v < 2:
            raise ValueError("n must be at least 2")
        return v

    @field_validator("picture")
    @classmethod
    def validate_picture(cls, v):
        if v not in PICTURES:
            raise ValueError('picture must be "hyperbolic" or "rational"')
        return v

    @field_validator("b")
    @classmethod
    def validate_b(cls, v):
        if v <= 0:
            raise ValueError("b must be positive")
        return v


def config_hash(model: BaseModel) -> str:
    """
    First 16 hex digits of the sha256 of a model's canonical JSON dump.

    The output block is left out: where a report is written does not change what it holds.
    """
    exclude = {"output"} if "output" in type(model).model_fields else None
    payload = json.dumps(model.model_dump(mode="json", exclude=exclude), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def load_config() -> Config:
    """Load configuration from environment variables"""
    log_file = os.getenv("QCSTAR_LOG_FILE", "logs/qcstar.log")
    config = Config(
        solver=SolverConfig(
            seed=int(os.getenv("QCSTAR_SEED", "0"))
        ),
        output=OutputConfig(
            out_dir=os.getenv("QCSTAR_OUT_DIR", "out")
        ),
        logging=LoggingConfig(
            level=os.getenv("QCSTAR_LOG_LEVEL", "INFO").upper(),
            file_path=log_file or None
        )
    )
    return config

# Global config instance
config = load_config()
