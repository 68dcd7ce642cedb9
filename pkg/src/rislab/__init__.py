"""Simulation, instrument control and codebook tools for 1-bit 16x16 RIS reflection measurements."""
from .codebook import Codebook, binarize, build_codebook, exhaustive_optimum, phase_profile
from .drivers import AnalyzerSettings, GeneratorSettings, analyzer_setup_commands, generator_setup_commands, ris_frame
from .fieldsim import FieldResult, SimConfig, received_power, sweep_grid_power
from .geometry import Pose, Scene, aim_angle, default_scene, element_positions, path_lengths
from .pattern import (
    RisPattern,
    checkerboard,
    complement,
    decode,
    encode,
    pattern_space_size,
    random_pattern,
    stripes,
    uniform,
)
from .sweep import SweepPlan, plan_2d, plan_3d, run_campaign, simulated_rig

__version__ = "0.1.0"
