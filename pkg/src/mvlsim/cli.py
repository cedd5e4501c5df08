"""Command line front end.

Subcommands:

  run         parse a netlist file, run its analyses, evaluate .measure
              directives, and write waveform/report artifacts
  cell        emit the netlist text of one generated cell
  decoder     build the quaternary decoder testbench for one technology,
              run it, check the sampled digits against the ideal map
  compare     run the decoder under both built-in technologies with an
              identical stimulus and report relative figures of merit
  sweep       repeat the decoder run while stepping one parameter
  dump-models model cards in netlist .model syntax

Exit codes: 0 success, 1 parse or configuration error, 2 solver failure
(no convergence or singular matrix), 3 file I/O error, 4 decoder logic
mismatch.  All file output is byte deterministic for a given input.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cells import (
    CellSpec,
    build_decoder,
    build_inverter,
    build_staircase_testbench,
    build_vlc,
    build_xor2,
    staircase_sample_times,
)
from .devices import TechnologyCard, preset, preset_names
from .engine import (
    ConvergenceError,
    SingularMatrixError,
    SolveOptions,
    WaveformSet,
    dc_operating_point,
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
from .mvl import Digit, LevelMap, ideal_decode, quantize
from .netlist import (
    Device,
    MeasureDirective,
    Netlist,
    NetlistError,
    OperatingPoint,
    Transient,
    device_line,
    emit,
    model_line,
    parse,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_IO = 3
EXIT_LOGIC = 4

_FORMATS = ("table", "json", "csv")

_SWEEP_PARAMS = ("vdd", "load", "hold", "vth_scale")

_CELL_NAMES = ("vlc1", "vlc2", "vlc3", "inverter", "xor2", "decoder",
               "testbench")


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by the decoder-style subcommands."""

    tech: str = "cmos32"
    vdd: float = 1.2
    hold: float = 5e-9
    slew: float = 1e-10
    load: float = 1e-15
    dt: float | None = None

    def __post_init__(self) -> None:
        if self.vdd <= 0.0:
            raise ValueError("vdd must be positive")
        if self.slew <= 0.0 or self.hold <= self.slew:
            raise ValueError("need hold > slew > 0")
        if self.load < 0.0:
            raise ValueError("load must be >= 0")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError("dt must be positive")


def resolve_tech(name: str) -> TechnologyCard:
    """A built-in preset name, or a path to a file of two .model lines."""
    if name in preset_names():
        return preset(name)
    path = Path(name)
    if not path.exists():
        raise ValueError(
            f"unknown technology {name!r}: not a preset "
            f"({', '.join(preset_names())}) and not a file"
        )
    net = parse(path.read_text())
    nfets = [c for c in net.models.values() if c.polarity == "n"]
    pfets = [c for c in net.models.values() if c.polarity == "p"]
    if len(nfets) != 1 or len(pfets) != 1:
        raise ValueError(
            f"technology file {name!r} must define exactly one NFET "
            f"and one PFET model"
        )
    return TechnologyCard(name=path.stem, nfet=nfets[0], pfet=pfets[0])


def _node_waveform(wset: WaveformSet, node: str) -> Waveform:
    if node == "0":
        return Waveform(wset.times, np.zeros_like(wset.times))
    return wset.voltage(node)


def evaluate_measures(net: Netlist, wset: WaveformSet) -> dict[str, float | None]:
    """Evaluate every .measure directive; unmeasurable ones map to None."""
    out: dict[str, float | None] = {}
    for m in net.measures:
        try:
            out[m.name] = _evaluate_one(net, wset, m)
        except MeasureError:
            out[m.name] = None
    return out


def _evaluate_one(net: Netlist, wset: WaveformSet, m: MeasureDirective) -> float:
    if m.kind in ("rise", "fall"):
        wf = _node_waveform(wset, m.targets[0])
        lo = float(np.min(wf.values))
        hi = float(np.max(wf.values))
        if hi <= lo:
            raise MeasureError(f"{m.name}: waveform has no swing")
        if m.kind == "rise":
            return rise_time(wf, lo, hi)
        return fall_time(wf, lo, hi)
    if m.kind == "delay":
        win = _node_waveform(wset, m.targets[0])
        wout = _node_waveform(wset, m.targets[1])
        mid_in = 0.5 * (float(np.min(win.values)) + float(np.max(win.values)))
        mid_out = 0.5 * (float(np.min(wout.values)) + float(np.max(wout.values)))
        return prop_delay(win, wout, mid_in, mid_out)
    # avgpower / peakpower measure the power delivered by a voltage source
    src = net.device(m.targets[0])
    if src is None or src.kind != "vsource":
        raise MeasureError(f"{m.name}: {m.targets[0]!r} is not a voltage source")
    v_wf = Waveform(
        wset.times,
        _node_waveform(wset, src.terminals[0]).values
        - _node_waveform(wset, src.terminals[1]).values,
    )
    i_wf = wset.current(src.name)
    avg, peak = supply_power(v_wf, i_wf)
    return avg if m.kind == "avgpower" else peak


def assemble_report(
    label: str,
    directives: tuple[MeasureDirective, ...],
    results: dict[str, float | None],
) -> MeasureReport | None:
    """Worst case per measure kind; None unless every kind is represented."""
    worst: dict[str, float] = {}
    for m in directives:
        val = results.get(m.name)
        if val is None:
            continue
        if m.kind not in worst or val > worst[m.kind]:
            worst[m.kind] = val
    needed = ("rise", "fall", "delay", "avgpower", "peakpower")
    if any(k not in worst for k in needed):
        return None
    return figures(
        technology=label,
        max_power=worst["peakpower"],
        avg_power=worst["avgpower"],
        rise=worst["rise"],
        fall=worst["fall"],
        delay=worst["delay"],
    )


def _report_dict(report: MeasureReport | None) -> dict[str, float | str] | None:
    if report is None:
        return None
    return dataclasses.asdict(report)


def _json_text(doc: object) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _out_dir(args: argparse.Namespace) -> Path:
    if args.out is not None:
        return Path(args.out)
    env = os.environ.get("MVLSIM_OUT")
    if env:
        return Path(env)
    return Path(".")


# ---------------------------------------------------------------------------
# decoder artifacts shared by decoder / compare / sweep


@dataclass
class DecoderRun:
    tech: TechnologyCard
    net: Netlist
    wset: WaveformSet
    observed: list[tuple[int | None, int | None]]
    expected: list[tuple[int, int]]
    logic_ok: bool
    measures: dict[str, float | None]
    report: MeasureReport | None
    stimulus: str

    @property
    def doc(self) -> dict:
        return {
            "technology": self.tech.name,
            "logic_ok": self.logic_ok,
            "expected": [list(pair) for pair in self.expected],
            "observed": [list(pair) for pair in self.observed],
            "measures": self.measures,
            "report": _report_dict(self.report),
            "stimulus": self.stimulus,
            "stimulus_sha256": hashlib.sha256(self.stimulus.encode()).hexdigest(),
        }


def run_decoder(cfg: RunConfig, tech: TechnologyCard | None = None) -> DecoderRun:
    if tech is None:
        tech = resolve_tech(cfg.tech)
    levels = LevelMap(4, cfg.vdd)
    spec = CellSpec(tech=tech, levels=levels, load=cfg.load)
    net = build_staircase_testbench(spec, hold=cfg.hold, slew=cfg.slew)
    if cfg.dt is not None:
        net = dataclasses.replace(
            net,
            analyses=[
                dataclasses.replace(a, dt=cfg.dt) if isinstance(a, Transient) else a
                for a in net.analyses
            ],
        )
    wset = transient(net)
    sample_times = staircase_sample_times(levels, hold=cfg.hold, slew=cfg.slew)
    bits = LevelMap(2, cfg.vdd)
    b1 = quantize(wset.voltage("b1"), bits, sample_times)
    b0 = quantize(wset.voltage("b0"), bits, sample_times)
    observed = list(zip(b1, b0))
    expected = [ideal_decode(Digit(x, 4)) for x in range(4)]
    logic_ok = observed == expected
    results = evaluate_measures(net, wset)
    report = assemble_report(tech.name, net.measures, results)
    vin = net.device("vin")
    assert vin is not None
    return DecoderRun(
        tech=tech,
        net=net,
        wset=wset,
        observed=observed,
        expected=expected,
        logic_ok=logic_ok,
        measures=results,
        report=report,
        stimulus=device_line(vin),
    )


def _config_doc(cfg: RunConfig) -> dict:
    return {
        "tech": cfg.tech,
        "vdd": cfg.vdd,
        "hold": cfg.hold,
        "slew": cfg.slew,
        "load": cfg.load,
        "dt": cfg.dt,
    }


def _write_decoder_artifacts(outdir: Path, cfg: RunConfig, run: DecoderRun) -> None:
    doc = {"command": "decoder", "config": _config_doc(cfg)}
    doc.update(run.doc)
    _write_text(outdir / f"decoder_{run.tech.name}.json", _json_text(doc))
    _write_text(outdir / f"decoder_{run.tech.name}.csv", run.wset.to_csv())


def _print_decoder(run: DecoderRun, formats: tuple[str, ...]) -> None:
    if "table" in formats:
        for x, (exp, obs) in enumerate(zip(run.expected, run.observed)):
            print(f"x={x} expected b1b0={exp[0]}{exp[1]} observed={obs[0]}{obs[1]}")
        print(f"logic {'ok' if run.logic_ok else 'MISMATCH'}")
        if run.report is not None:
            print(report_table([run.report]))
        else:
            for name in sorted(run.measures):
                print(f"{name} = {run.measures[name]}")
    if "json" in formats:
        doc = {"command": "decoder"}
        doc.update(run.doc)
        sys.stdout.write(_json_text(doc))
    if "csv" in formats:
        sys.stdout.write(run.wset.to_csv())


# ---------------------------------------------------------------------------
# subcommand bodies


def _cfg_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        tech=args.tech,
        vdd=args.vdd,
        hold=args.hold,
        slew=args.slew,
        load=args.load,
        dt=args.dt,
    )


def cmd_run(args: argparse.Namespace) -> int:
    text = Path(args.netlist).read_text()
    net = parse(text)
    opts = SolveOptions()
    outdir = _out_dir(args)
    op: dict[str, float] | None = None
    wset: WaveformSet | None = None
    for analysis in net.analyses:
        if isinstance(analysis, OperatingPoint):
            op = dc_operating_point(net, opts)
        else:
            wset = transient(net, analysis, opts)
    results: dict[str, float | None] = {}
    report = None
    if wset is not None:
        results = evaluate_measures(net, wset)
        report = assemble_report(Path(args.netlist).stem, net.measures, results)
    doc = {
        "command": "run",
        "netlist": Path(args.netlist).name,
        "title": net.title,
        "op": op,
        "measures": results,
        "report": _report_dict(report),
    }
    stem = Path(args.netlist).stem
    _write_text(outdir / f"{stem}.json", _json_text(doc))
    if wset is not None:
        _write_text(outdir / f"{stem}.csv", wset.to_csv())
    if "table" in args.format:
        if op is not None:
            for node in net.nodes:
                if node != "0":
                    print(f"v({node}) = {op[node]!r}")
        for name in sorted(results):
            print(f"{name} = {results[name]}")
        if report is not None:
            print(report_table([report]))
    if "json" in args.format:
        sys.stdout.write(_json_text(doc))
    if "csv" in args.format and wset is not None:
        sys.stdout.write(wset.to_csv())
    return EXIT_OK


def build_cell(name: str, spec: CellSpec, hold: float, slew: float) -> Netlist:
    """One generated cell by CLI name; vlc indices are 1-based here."""
    if name.startswith("vlc"):
        return build_vlc(int(name[3:]) - 1, spec)
    if name == "inverter":
        return build_inverter(spec)
    if name == "xor2":
        return build_xor2(spec)
    if name == "decoder":
        return build_decoder(spec)
    if name == "testbench":
        return build_staircase_testbench(spec, hold=hold, slew=slew)
    raise ValueError(f"unknown cell {name!r}; one of: {', '.join(_CELL_NAMES)}")


def cmd_cell(args: argparse.Namespace) -> int:
    cfg = _cfg_from_args(args)
    tech = resolve_tech(cfg.tech)
    spec = CellSpec(tech=tech, levels=LevelMap(4, cfg.vdd), load=cfg.load)
    text = emit(build_cell(args.cell, spec, cfg.hold, cfg.slew))
    _write_text(_out_dir(args) / f"{args.cell}_{tech.name}.sp", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_decoder(args: argparse.Namespace) -> int:
    cfg = _cfg_from_args(args)
    run = run_decoder(cfg)
    _write_decoder_artifacts(_out_dir(args), cfg, run)
    _print_decoder(run, tuple(args.format))
    return EXIT_OK if run.logic_ok else EXIT_LOGIC


def improvement_pct(reference: float, other: float) -> float:
    """Reduction of ``other`` relative to ``reference``, in percent."""
    if reference == 0.0:
        raise ValueError("reference figure is zero")
    return (reference - other) / reference * 100.0


def cmd_compare(args: argparse.Namespace) -> int:
    base = _cfg_from_args(args)
    runs: dict[str, DecoderRun] = {}
    outdir = _out_dir(args)
    for name in ("cmos32", "gnrfet32"):
        cfg = dataclasses.replace(base, tech=name)
        run = run_decoder(cfg)
        _write_decoder_artifacts(outdir, cfg, run)
        runs[name] = run
    cm, gn = runs["cmos32"], runs["gnrfet32"]
    if cm.stimulus != gn.stimulus:
        raise ValueError("stimulus mismatch between technology runs")
    improvements: dict[str, float] | None = None
    if cm.report is not None and gn.report is not None:
        improvements = {
            "avg_power": improvement_pct(cm.report.avg_power, gn.report.avg_power),
            "rise_time": improvement_pct(cm.report.rise_time, gn.report.rise_time),
            "fall_time": improvement_pct(cm.report.fall_time, gn.report.fall_time),
            "pdp": improvement_pct(cm.report.pdp, gn.report.pdp),
        }
    doc = {
        "command": "compare",
        "config": _config_doc(base),
        "runs": {name: runs[name].doc for name in runs},
        "improvements_pct": improvements,
        "stimulus_sha256": hashlib.sha256(cm.stimulus.encode()).hexdigest(),
    }
    _write_text(outdir / "compare.json", _json_text(doc))
    if "table" in args.format:
        reports = [r.report for r in (cm, gn) if r.report is not None]
        if reports:
            print(report_table(reports, include_delay=False))
        if improvements is not None:
            print(f"{improvements['avg_power']:.2f}% decrease in power")
            print(f"{improvements['rise_time']:.2f}% improvement in rise time")
            print(f"{improvements['fall_time']:.2f}% improvement in fall time")
            print(f"{improvements['pdp']:.2f}% decrease in PDP")
    if "json" in args.format:
        sys.stdout.write(_json_text(doc))
    if not (cm.logic_ok and gn.logic_ok):
        return EXIT_LOGIC
    return EXIT_OK


def _sweep_tech(cfg: RunConfig, param: str, value: float) -> TechnologyCard:
    tech = resolve_tech(cfg.tech)
    if param != "vth_scale":
        return tech
    return TechnologyCard(
        name=tech.name,
        nfet=dataclasses.replace(tech.nfet, vth=tech.nfet.vth * value),
        pfet=dataclasses.replace(tech.pfet, vth=tech.pfet.vth * value),
        note=tech.note,
    )


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.param not in _SWEEP_PARAMS:
        raise ValueError(
            f"unknown sweep parameter {args.param!r}; "
            f"choose from {', '.join(_SWEEP_PARAMS)}"
        )
    if args.count < 1:
        raise ValueError("count must be >= 1")
    base = _cfg_from_args(args)
    values = np.linspace(args.start, args.stop, args.count)
    rows: list[tuple[float, int, str, float]] = []
    for idx, raw in enumerate(values):
        value = float(raw)
        cfg = base
        if args.param in ("vdd", "load", "hold"):
            cfg = dataclasses.replace(base, **{args.param: value})
        run = run_decoder(cfg, tech=_sweep_tech(cfg, args.param, value))
        rows.append((value, idx, "logic_ok", 1.0 if run.logic_ok else 0.0))
        for name in sorted(run.measures):
            val = run.measures[name]
            if val is not None:
                rows.append((value, idx, name, val))
        if run.report is not None:
            for field in ("max_power", "avg_power", "rise_time",
                          "fall_time", "prop_delay", "pdp", "edp"):
                rows.append((value, idx, field, getattr(run.report, field)))
    lines = [f"{args.param},run,metric,value"]
    for value, idx, metric, val in rows:
        lines.append(f"{value!r},{idx},{metric},{val!r}")
    text = "\n".join(lines) + "\n"
    _write_text(_out_dir(args) / f"sweep_{args.param}.csv", text)
    if "csv" in args.format or "table" in args.format:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_dump_models(args: argparse.Namespace) -> int:
    names = [args.tech] if args.tech else list(preset_names())
    for name in names:
        tech = resolve_tech(name)
        print(f"* {tech.name}: {tech.note}" if tech.note else f"* {tech.name}")
        print(model_line("nfet", tech.nfet))
        print(model_line("pfet", tech.pfet))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser, with_tech: bool = True) -> None:
    if with_tech:
        p.add_argument("--tech", default="cmos32",
                       help="preset name or .model file (default cmos32)")
    p.add_argument("--vdd", type=float, default=1.2, help="supply voltage")
    p.add_argument("--hold", type=float, default=5e-9,
                   help="time spent at each input level")
    p.add_argument("--slew", type=float, default=1e-10,
                   help="input ramp time between levels")
    p.add_argument("--load", type=float, default=1e-15,
                   help="output load capacitance")
    p.add_argument("--dt", type=float, default=None,
                   help="override the transient step")
    _add_out(p)


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None,
                   help="output directory (default $MVLSIM_OUT or .)")
    p.add_argument("--format", action="append", choices=_FORMATS, default=None,
                   help="stdout format, repeatable (default table)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvlsim",
        description="voltage-mode multi-valued-logic circuit simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a netlist file")
    p_run.add_argument("netlist", help="path to a netlist file")
    _add_out(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cel = sub.add_parser("cell", help="emit a generated cell netlist")
    p_cel.add_argument("cell", choices=_CELL_NAMES)
    _add_common(p_cel)
    p_cel.set_defaults(func=cmd_cell)

    p_dec = sub.add_parser("decoder", help="run the quaternary decoder")
    _add_common(p_dec)
    p_dec.set_defaults(func=cmd_decoder)

    p_cmp = sub.add_parser("compare",
                           help="decoder under cmos32 and gnrfet32")
    _add_common(p_cmp, with_tech=False)
    p_cmp.set_defaults(func=cmd_compare, tech="cmos32")

    p_swp = sub.add_parser("sweep", help="step one decoder parameter")
    p_swp.add_argument("--param", required=True,
                       help=f"one of: {', '.join(_SWEEP_PARAMS)}")
    p_swp.add_argument("--start", type=float, required=True)
    p_swp.add_argument("--stop", type=float, required=True)
    p_swp.add_argument("--count", type=int, required=True)
    _add_common(p_swp)
    p_swp.set_defaults(func=cmd_sweep)

    p_dmp = sub.add_parser("dump-models", help="print model cards")
    p_dmp.add_argument("--tech", default=None)
    p_dmp.set_defaults(func=cmd_dump_models)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold that into our exit-1 class
        # so 2 stays reserved for solver failures.
        code = exc.code if isinstance(exc.code, int) else 1
        return EXIT_OK if code == 0 else EXIT_USAGE
    if getattr(args, "format", None) is not None:
        args.format = tuple(dict.fromkeys(args.format))
    elif hasattr(args, "format"):
        args.format = ("table",)
    try:
        return args.func(args)
    except NetlistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, SingularMatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
