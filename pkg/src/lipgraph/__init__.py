"""Longest chains of random points on Lipschitz graphs."""

__version__ = "0.1.0"

from .chain import (ChainResult, LipClass, TransformedPoint, WitnessReport, cone_leq,
                    longest_chain_bruteforce, longest_chain_dp, longest_chain_fast,
                    shear_transform, validate_witness)
from .montecarlo import ScalingRecord, TrialBatch, run_trials, scaling_study, summarize
from .pointcloud import Point, PointCloud, SeedSpec, generate_uniform, load_cloud, save_cloud

__all__ = [
    "ChainResult", "LipClass", "TransformedPoint", "WitnessReport", "cone_leq",
    "longest_chain_bruteforce", "longest_chain_dp", "longest_chain_fast",
    "shear_transform", "validate_witness",
    "ScalingRecord", "TrialBatch", "run_trials", "scaling_study", "summarize",
    "Point", "PointCloud", "SeedSpec", "generate_uniform", "load_cloud", "save_cloud",
]
