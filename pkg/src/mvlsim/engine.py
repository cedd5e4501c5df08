"""Modified nodal analysis: Newton DC operating point and fixed-step transient.

Unknowns are the non-ground node voltages followed by one branch current per
voltage source (current into the + terminal).  Nonlinear FETs are linearized
each Newton iteration; convergence requires both a small update step and a
small true KCL residual at every node:

    |sum of branch currents| <= abstol + reltol * max |branch current|
    |dv| <= vtol for every unknown

If the plain solve fails, the DC path retries with gmin stepping: shunts of
gmin * 10**(gmin_steps - s) from every node to ground for s = 0..gmin_steps,
each solution seeding the next.  Independently of stepping, a constant gmin
shunt sits on every FET drain/source node so that fully cut-off stacks keep
a DC path to ground.

Transient analysis marches a fixed step with forced breakpoints at PWL
corners and PULSE edges.  The step is clamped to tstop/1000 and to a tenth
of the shortest stimulus edge.  Capacitors (and the lumped FET charge
elements) become companion conductance/history-current pairs; backward
Euler is the default rule, trapezoidal is selectable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .devices import cap_companion, fet_eval
from .measure import Waveform
from .netlist import Netlist, Transient


class SingularMatrixError(RuntimeError):
    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(f"singular matrix (zero pivot at index {pivot})")


class ConvergenceError(RuntimeError):
    pass


@dataclass
class SolveOptions:
    abstol: float = 1e-9        # A, KCL residual floor
    reltol: float = 1e-4        # scales the largest branch current per node
    vtol: float = 1e-6          # V, Newton update tolerance
    max_newton_iters: int = 100
    gmin: float = 1e-12         # S
    gmin_steps: int = 10
    integration: str = "backward_euler"  # or "trapezoidal"
    enable_gmin: bool = True

    def __post_init__(self):
        for name in ("abstol", "reltol", "vtol", "gmin"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0")
        if self.max_newton_iters < 1 or self.gmin_steps < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.integration not in ("backward_euler", "trapezoidal"):
            raise ValueError(f"unknown integration rule {self.integration!r}")


@dataclass
class MnaSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    index: dict[str, int]  # unknown name -> row; nodes then "i(<source>)"

    @property
    def dimension(self) -> int:
        return len(self.rhs)


def _lu_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense LU with partial pivoting; raises SingularMatrixError."""
    a = np.array(a, dtype=float)
    x = np.array(b, dtype=float)
    n = a.shape[0]
    if n == 0:
        return x
    norm = float(np.max(np.sum(np.abs(a), axis=1)))
    thresh = 1e-14 * norm
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= thresh:
            raise SingularMatrixError(k)
        if p != k:
            a[[k, p]] = a[[p, k]]
            x[[k, p]] = x[[p, k]]
        mult = a[k + 1:, k] / a[k, k]
        a[k + 1:, k + 1:] -= np.outer(mult, a[k, k + 1:])
        x[k + 1:] -= mult * x[k]
    for i in range(n - 1, -1, -1):
        if abs(a[i, i]) <= thresh:
            raise SingularMatrixError(i)
        x[i] = (x[i] - a[i, i + 1:] @ x[i + 1:]) / a[i, i]
    return x


def solve_linear(system: MnaSystem) -> np.ndarray:
    """Solve system.matrix @ x = system.rhs by LU with partial pivoting."""
    return _lu_solve(system.matrix, system.rhs)


@dataclass
class RunStats:
    steps: int = 0
    newton_iterations: int = 0
    kcl_excess: np.ndarray = field(default_factory=lambda: np.zeros(0))
    # kcl_excess[i] = max over nodes of (|residual| - reltol*scale) at point i;
    # every accepted point satisfies kcl_excess[i] <= abstol.


@dataclass
class WaveformSet:
    times: np.ndarray
    voltages: dict[str, Waveform]
    currents: dict[str, Waveform]
    stats: RunStats

    def voltage(self, node: str) -> Waveform:
        return self.voltages[node.lower()]

    def current(self, source: str) -> Waveform:
        return self.currents[source.lower()]

    def to_csv(self) -> str:
        cols = ["time"] + list(self.voltages) + [f"i({n})" for n in self.currents]
        series = ([self.times] + [w.values for w in self.voltages.values()]
                  + [w.values for w in self.currents.values()])
        lines = [",".join(cols)]
        for i in range(len(self.times)):
            lines.append(",".join(repr(float(s[i])) for s in series))
        return "\n".join(lines) + "\n"


class _Circuit:
    """Index maps and stamp lists shared by DC and transient solves."""

    def __init__(self, net: Netlist, opts: SolveOptions):
        net.validate()
        self.net = net
        self.opts = opts
        nodes = net.nodes
        self.node_names = nodes[1:]  # non-ground
        self.node_of = {name: i - 1 for i, name in enumerate(nodes)}  # "0" -> -1
        self.nv = len(nodes) - 1
        self.vsources = [d for d in net.devices if d.kind == "vsource"]
        self.n = self.nv + len(self.vsources)
        self.resistors = []
        for d in net.devices:
            if d.kind == "resistor":
                g = 1.0 / d.params["resistance"]
                self.resistors.append((self.node_of[d.terminals[0]],
                                       self.node_of[d.terminals[1]], g))
        self.fets = []
        gmin_nodes: set[int] = set()
        self.caps = []  # (node_a, node_b, farads) with -1 for ground
        for d in net.devices:
            if d.kind == "capacitor":
                self.caps.append((self.node_of[d.terminals[0]],
                                  self.node_of[d.terminals[1]],
                                  d.params["capacitance"]))
            elif d.kind == "fet":
                nd, ng, ns, _nb = (self.node_of[t] for t in d.terminals)
                card = net.models[d.model]
                m = d.params.get("m", 1.0)
                eff = replace(card, k=card.k * m)
                self.fets.append((nd, ng, ns, eff))
                if card.cg * m > 0.0:
                    self.caps.append((ng, ns, card.cg * m))
                if card.cd * m > 0.0:
                    self.caps.append((nd, -1, card.cd * m))
                gmin_nodes.update(i for i in (nd, ns) if i >= 0)
        self.gmin_nodes = sorted(gmin_nodes)
        base = np.zeros((self.n, self.n))
        for ia, ib, g in self.resistors:
            self._stamp_g(base, ia, ib, g)
        self.src_rows = []
        for j, d in enumerate(self.vsources):
            row = self.nv + j
            ip, im = self.node_of[d.terminals[0]], self.node_of[d.terminals[1]]
            if ip >= 0:
                base[ip, row] += 1.0
                base[row, ip] += 1.0
            if im >= 0:
                base[im, row] -= 1.0
                base[row, im] -= 1.0
            self.src_rows.append((ip, im, row, d.stimulus))
        self.base = base

    @staticmethod
    def _stamp_g(a: np.ndarray, ia: int, ib: int, g: float) -> None:
        if ia >= 0:
            a[ia, ia] += g
        if ib >= 0:
            a[ib, ib] += g
        if ia >= 0 and ib >= 0:
            a[ia, ib] -= g
            a[ib, ia] -= g

    def source_values(self, t: float) -> list[float]:
        return [stim.value_at(t) for _, _, _, stim in self.src_rows]

    def _eval_fets(self, x: np.ndarray):
        out = []
        for nd, ng, ns, card in self.fets:
            vd = x[nd] if nd >= 0 else 0.0
            vg = x[ng] if ng >= 0 else 0.0
            vs = x[ns] if ns >= 0 else 0.0
            i, gm, gds = fet_eval(card, vg - vs, vd - vs)
            out.append((i, gm, gds, vg - vs, vd - vs))
        return out

    def _kcl_excess(self, x, svals, companions, shunt_all, fet_evals):
        """Worst (|node residual| - reltol*scale) over nodes, plus that node."""
        res = np.zeros(self.nv)
        scale = np.zeros(self.nv)

        def add(node, cur):
            if node >= 0:
                res[node] += cur
                a = abs(cur)
                if a > scale[node]:
                    scale[node] = a

        for ia, ib, g in self.resistors:
            va = x[ia] if ia >= 0 else 0.0
            vb = x[ib] if ib >= 0 else 0.0
            cur = g * (va - vb)
            add(ia, cur)
            add(ib, -cur)
        if companions is not None:
            for (ia, ib, _c), (geq, ihist) in zip(self.caps, companions):
                va = x[ia] if ia >= 0 else 0.0
                vb = x[ib] if ib >= 0 else 0.0
                cur = geq * (va - vb) + ihist
                add(ia, cur)
                add(ib, -cur)
        for (nd, ng, ns, _card), (i, _gm, _gds, _vgs, _vds) in zip(self.fets, fet_evals):
            add(nd, i)
            add(ns, -i)
        for ip, im, row, _stim in self.src_rows:
            cur = x[row]
            add(ip, cur)
            add(im, -cur)
        if self.opts.enable_gmin:
            for node in self.gmin_nodes:
                add(node, self.opts.gmin * x[node])
        if shunt_all > 0.0:
            for node in range(self.nv):
                add(node, shunt_all * x[node])
        if self.nv == 0:
            return 0.0, -1
        excess = np.abs(res) - self.opts.reltol * scale
        worst = int(np.argmax(excess))
        return float(excess[worst]), worst

    def _assemble(self, x, svals, companions, shunt_all, fet_evals):
        a = self.base.copy()
        b = np.zeros(self.n)
        if self.opts.enable_gmin:
            for node in self.gmin_nodes:
                a[node, node] += self.opts.gmin
        if shunt_all > 0.0:
            idx = np.arange(self.nv)
            a[idx, idx] += shunt_all
        for (ip, im, row, _stim), v in zip(self.src_rows, svals):
            b[row] = v
        if companions is not None:
            for (ia, ib, _c), (geq, ihist) in zip(self.caps, companions):
                self._stamp_g(a, ia, ib, geq)
                if ia >= 0:
                    b[ia] -= ihist
                if ib >= 0:
                    b[ib] += ihist
        for (nd, ng, ns, _card), (i, gm, gds, vgs, vds) in zip(self.fets, fet_evals):
            ieq = i - gm * vgs - gds * vds
            if nd >= 0:
                if ng >= 0:
                    a[nd, ng] += gm
                a[nd, nd] += gds
                if ns >= 0:
                    a[nd, ns] -= gm + gds
                b[nd] -= ieq
            if ns >= 0:
                if ng >= 0:
                    a[ns, ng] -= gm
                if nd >= 0:
                    a[ns, nd] -= gds
                a[ns, ns] += gm + gds
                b[ns] += ieq
        return a, b

    def newton(self, x0, svals, companions, shunt_all, label=""):
        """Newton-Raphson to the dual (residual + step) criterion."""
        opts = self.opts
        x = np.array(x0, dtype=float)
        vlimit = max(1.0, 2.0 * max((abs(v) for v in svals), default=1.0))
        last_dx = math.inf
        evals = self._eval_fets(x)
        for it in range(1, opts.max_newton_iters + 1):
            excess, worst = self._kcl_excess(x, svals, companions, shunt_all, evals)
            if excess <= opts.abstol and last_dx <= opts.vtol:
                return x, it - 1, excess
            a, b = self._assemble(x, svals, companions, shunt_all, evals)
            xn = _lu_solve(a, b)
            dx = xn - x
            np.clip(dx[:self.nv], -vlimit, vlimit, out=dx[:self.nv])
            x = x + dx
            if not np.all(np.isfinite(x)):
                raise ConvergenceError(f"solution diverged{label}")
            last_dx = float(np.max(np.abs(dx))) if len(dx) else 0.0
            evals = self._eval_fets(x)
        excess, worst = self._kcl_excess(x, svals, companions, shunt_all, evals)
        name = self.node_names[worst] if 0 <= worst < self.nv else "?"
        raise ConvergenceError(
            f"Newton failed after {opts.max_newton_iters} iterations"
            f"{label}; worst node {name!r} (KCL excess {excess:.3e} A)")

    def solve_dc(self, svals):
        """DC solution with gmin-stepping fallback; caps are open."""
        opts = self.opts
        x0 = np.zeros(self.n)
        try:
            return self.newton(x0, svals, None, 0.0, label=" (dc)")
        except (ConvergenceError, SingularMatrixError):
            if not opts.enable_gmin:
                raise
        x = np.zeros(self.n)
        result = None
        for s in range(opts.gmin_steps + 1):
            shunt = opts.gmin * 10.0 ** (opts.gmin_steps - s)
            x, iters, excess = self.newton(x, svals, None, shunt,
                                           label=f" (gmin step {s})")
            result = (x, iters, excess)
        return result


def mna_system(net: Netlist, t: float = 0.0, x: np.ndarray | None = None,
               opts: SolveOptions | None = None) -> MnaSystem:
    """The linearized MNA system at operating point x (zeros by default).

    For passive circuits this is the exact system; for FET circuits it is
    one Newton iterate's matrix.  Useful for inspection and tests.
    """
    opts = opts or SolveOptions()
    ckt = _Circuit(net, opts)
    xv = np.zeros(ckt.n) if x is None else np.asarray(x, dtype=float)
    svals = ckt.source_values(t)
    a, b = ckt._assemble(xv, svals, None, 0.0, ckt._eval_fets(xv))
    index = {name: i for i, name in enumerate(ckt.node_names)}
    for j, d in enumerate(ckt.vsources):
        index[f"i({d.name})"] = ckt.nv + j
    return MnaSystem(matrix=a, rhs=b, index=index)


def dc_operating_point(net: Netlist, opts: SolveOptions | None = None) -> dict[str, float]:
    """Node voltages of the DC operating point (sources at their t=0 values)."""
    opts = opts or SolveOptions()
    ckt = _Circuit(net, opts)
    x, _iters, _excess = ckt.solve_dc(ckt.source_values(0.0))
    return {name: float(x[i]) for i, name in enumerate(ckt.node_names)}


def _segment_times(ckt: _Circuit, analysis: Transient) -> tuple[list[float], float]:
    tstop = analysis.tstop
    dt = min(analysis.dt, tstop / 1000.0)
    if analysis.dtmax is not None:
        dt = min(dt, analysis.dtmax)
    edges = [e for _, _, _, stim in ckt.src_rows
             if (e := stim.min_edge()) is not None]
    if edges:
        dt = min(dt, min(edges) / 10.0)
    bps = {0.0, tstop}
    for _, _, _, stim in ckt.src_rows:
        bps.update(stim.breakpoints(tstop))
    return sorted(bps), dt


def transient(net: Netlist, analysis: Transient | None = None,
              opts: SolveOptions | None = None) -> WaveformSet:
    """Fixed-step transient from the t=0 operating point.

    Stimulus breakpoints are forced onto the time grid; each segment between
    breakpoints is subdivided uniformly with steps no larger than the
    clamped dt.  Identical inputs produce bit-identical WaveformSets.
    """
    opts = opts or SolveOptions()
    if analysis is None:
        trans = [a for a in net.analyses if isinstance(a, Transient)]
        if not trans:
            raise ValueError("netlist has no .tran analysis")
        analysis = trans[0]
    ckt = _Circuit(net, opts)
    bps, dt = _segment_times(ckt, analysis)
    rule = opts.integration

    x, iters0, excess0 = ckt.solve_dc(ckt.source_values(0.0))
    cap_v = []
    for ia, ib, _c in ckt.caps:
        va = x[ia] if ia >= 0 else 0.0
        vb = x[ib] if ib >= 0 else 0.0
        cap_v.append(va - vb)
    cap_i = [0.0] * len(ckt.caps)

    times = [0.0]
    solutions = [x]
    excesses = [excess0]
    total_iters = iters0
    try:
        for t0, t1 in zip(bps, bps[1:]):
            span = t1 - t0
            nsub = max(1, int(math.ceil(span / dt - 1e-9)))
            h = span / nsub
            for j in range(1, nsub + 1):
                t = t1 if j == nsub else t0 + j * h
                comps = [cap_companion(c, cap_v[k], cap_i[k], h, rule)
                         for k, (_ia, _ib, c) in enumerate(ckt.caps)]
                x, iters, excess = ckt.newton(x, ckt.source_values(t), comps,
                                              0.0, label=f" at t={t:.6g}s")
                total_iters += iters
                for k, (ia, ib, _c) in enumerate(ckt.caps):
                    va = x[ia] if ia >= 0 else 0.0
                    vb = x[ib] if ib >= 0 else 0.0
                    vab = va - vb
                    geq, ihist = comps[k]
                    cap_i[k] = geq * vab + ihist
                    cap_v[k] = vab
                times.append(t)
                solutions.append(x)
                excesses.append(excess)
    except ConvergenceError as e:
        raise ConvergenceError(str(e)) from None

    tarr = np.array(times)
    sol = np.array(solutions)
    voltages = {name: Waveform(tarr, sol[:, i])
                for i, name in enumerate(ckt.node_names)}
    currents = {d.name: Waveform(tarr, sol[:, ckt.nv + j])
                for j, d in enumerate(ckt.vsources)}
    stats = RunStats(steps=len(times) - 1, newton_iterations=total_iters,
                     kcl_excess=np.array(excesses))
    return WaveformSet(times=tarr, voltages=voltages, currents=currents,
                       stats=stats)
