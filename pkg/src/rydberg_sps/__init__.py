"""Rydberg-exciton blockade single-photon source in cuprous oxide."""

from .blockade import BlockadeResult, PairTerm, blockade_report, ladder_oracle
from .config import Config, ConfigError, parse_config
from .emitter import EmitterParams, emission_spectrum, g2_closed_form, g2_numeric, photon_rate, steady_population
from .exciton import CrystalGeometry, DriveConfig, ExcitonLevel, MaterialConstants
from .lindblad import LindbladModel, correlation, evolve, steady_state
from .sweep import OperatingPoint, SweepSpec, operating_report, optimize_point, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BlockadeResult",
    "Config",
    "ConfigError",
    "CrystalGeometry",
    "DriveConfig",
    "EmitterParams",
    "ExcitonLevel",
    "LindbladModel",
    "MaterialConstants",
    "OperatingPoint",
    "PairTerm",
    "SweepSpec",
    "blockade_report",
    "correlation",
    "emission_spectrum",
    "evolve",
    "g2_closed_form",
    "g2_numeric",
    "ladder_oracle",
    "operating_report",
    "optimize_point",
    "parse_config",
    "photon_rate",
    "run_sweep",
    "steady_population",
    "steady_state",
]
