"""Voltage-mode simulator for multi-valued-logic circuits.

The package bundles a small SPICE-like netlist dialect, a nonlinear
DC / transient solver built on modified nodal analysis, a square-law
FET model with two built-in technology cards, multi-valued-logic
helpers, and generators for the voltage-level-converter, XOR, and
quaternary-decoder cells the simulator is meant to characterize.
"""

from .cells import (
    CellSpec,
    build_decoder,
    build_inverter,
    build_staircase_testbench,
    build_vlc,
    build_xor2,
    staircase_points,
    staircase_sample_times,
    vlc_thresholds,
    with_dc_input,
)
from .cli import (
    DecoderRun,
    RunConfig,
    improvement_pct,
    resolve_tech,
    run_decoder,
)
from .devices import (
    FetModelCard,
    TechnologyCard,
    cap_companion,
    fet_eval,
    preset,
    preset_names,
)
from .engine import (
    ConvergenceError,
    MnaSystem,
    RunStats,
    SingularMatrixError,
    SolveOptions,
    WaveformSet,
    dc_operating_point,
    mna_system,
    solve_linear,
    transient,
)
from .measure import (
    MeasureError,
    MeasureReport,
    Waveform,
    fall_time,
    figures,
    prop_delay,
    report_table,
    rise_time,
    supply_power,
)
from .mvl import (
    Digit,
    LevelMap,
    gate_level_decode,
    ideal_decode,
    ideal_vlc,
    quantize,
    truth_table_csv,
)
from .netlist import (
    DcStimulus,
    Device,
    MeasureDirective,
    Netlist,
    NetlistError,
    OperatingPoint,
    PulseStimulus,
    PwlStimulus,
    Transient,
    emit,
    parse,
    parse_value,
)

__version__ = "0.1.0"

__all__ = [
    "CellSpec",
    "ConvergenceError",
    "DcStimulus",
    "DecoderRun",
    "Device",
    "Digit",
    "FetModelCard",
    "LevelMap",
    "MeasureDirective",
    "MeasureError",
    "MeasureReport",
    "MnaSystem",
    "Netlist",
    "NetlistError",
    "OperatingPoint",
    "PulseStimulus",
    "PwlStimulus",
    "RunConfig",
    "RunStats",
    "SingularMatrixError",
    "SolveOptions",
    "TechnologyCard",
    "Transient",
    "Waveform",
    "WaveformSet",
    "build_decoder",
    "build_inverter",
    "build_staircase_testbench",
    "build_vlc",
    "build_xor2",
    "cap_companion",
    "dc_operating_point",
    "emit",
    "fall_time",
    "fet_eval",
    "figures",
    "gate_level_decode",
    "ideal_decode",
    "ideal_vlc",
    "improvement_pct",
    "mna_system",
    "parse",
    "parse_value",
    "preset",
    "preset_names",
    "prop_delay",
    "quantize",
    "report_table",
    "resolve_tech",
    "rise_time",
    "run_decoder",
    "solve_linear",
    "staircase_points",
    "staircase_sample_times",
    "supply_power",
    "transient",
    "truth_table_csv",
    "vlc_thresholds",
    "with_dc_input",
    "__version__",
]
