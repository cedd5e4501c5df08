"""Device evaluation: square-law FETs, capacitor companions, technology cards.

The FET model is a symmetric SPICE level-1 square law.  A model card carries
a signed threshold voltage, a transconductance factor k (A/V^2), a
channel-length modulation term lambda (1/V) and two lumped capacitances:
cg from gate to source and cd from drain to ground.  P-channel devices are
evaluated by sign symmetry: flip the terminal voltages, evaluate the
N-channel twin, flip the current.  For vds < 0 the drain and source roles
swap, which keeps the current continuous through vds = 0.

No minimum off-conductance is added here; the solver applies gmin shunts
externally (see engine.SolveOptions).

Two built-in technology cards are shipped, ``cmos32`` and ``gnrfet32``.
Their numbers are calibrated behavioural values, not foundry extractions;
see ``preset`` and tools/calibrate_presets.py for how they were chosen.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FetModelCard:
    """Level-1 FET card. vth is signed: >= 0 for N devices, <= 0 for P."""

    polarity: str  # "n" or "p"
    vth: float     # V
    k: float       # A/V^2
    lam: float     # 1/V, channel-length modulation
    cg: float      # F, lumped gate-source capacitance
    cd: float = 0.0  # F, lumped drain-ground capacitance

    def __post_init__(self):
        if self.polarity not in ("n", "p"):
            raise ValueError(f"polarity must be 'n' or 'p', got {self.polarity!r}")
        if not self.k > 0.0:
            raise ValueError("k must be > 0")
        if self.lam < 0.0:
            raise ValueError("lambda must be >= 0")
        if self.cg < 0.0 or self.cd < 0.0:
            raise ValueError("cg and cd must be >= 0")
        if self.polarity == "n" and self.vth < 0.0:
            raise ValueError("N-type card requires vth >= 0")
        if self.polarity == "p" and self.vth > 0.0:
            raise ValueError("P-type card requires vth <= 0")


def _nfet_forward(vth: float, k: float, lam: float, vgs: float, vds: float):
    # vds >= 0 here; caller handles the reversed device.
    vov = vgs - vth
    if vov <= 0.0:
        return 0.0, 0.0, 0.0
    cl = 1.0 + lam * vds
    if vds < vov:  # triode
        q = vov * vds - 0.5 * vds * vds
        i = k * q * cl
        gm = k * vds * cl
        gds = k * (vov - vds) * cl + k * q * lam
    else:  # saturation
        i = 0.5 * k * vov * vov * cl
        gm = k * vov * cl
        gds = 0.5 * k * vov * vov * lam
    return i, gm, gds


def _nfet(vth: float, k: float, lam: float, vgs: float, vds: float):
    if vds >= 0.0:
        return _nfet_forward(vth, k, lam, vgs, vds)
    # Drain/source roles swap; gate voltage is then measured from the
    # original drain. id = -f(vgs - vds, -vds), differentiated exactly.
    i, gm, gds = _nfet_forward(vth, k, lam, vgs - vds, -vds)
    return -i, -gm, gm + gds


def fet_eval(card: FetModelCard, vgs: float, vds: float):
    """Evaluate a FET card at (vgs, vds).

    Returns (id, gm, gds): the drain current (positive drain-to-source) and
    its exact partial derivatives with respect to vgs and vds.  Regions:
    cutoff for vgs <= vth, triode for vds < vgs - vth, saturation otherwise,
    all scaled by (1 + lambda*vds).  The model is C1-continuous across the
    region boundaries.
    """
    if card.polarity == "n":
        return _nfet(card.vth, card.k, card.lam, vgs, vds)
    i, gm, gds = _nfet(-card.vth, card.k, card.lam, -vgs, -vds)
    return -i, gm, gds


def cap_companion(c: float, v_prev: float, i_prev: float, dt: float, rule: str):
    """Discrete companion of a capacitor branch: i = geq*v + ihist.

    v_prev and i_prev are the branch voltage and current at the previous
    accepted time point (i_prev is only used by the trapezoidal rule).
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    if c == 0.0:
        return 0.0, 0.0
    if rule == "backward_euler":
        geq = c / dt
        return geq, -geq * v_prev
    if rule == "trapezoidal":
        geq = 2.0 * c / dt
        return geq, -geq * v_prev - i_prev
    raise ValueError(f"unknown integration rule {rule!r}")


def fet_charge_currents(card: FetModelCard, dt: float, vgs_prev: float,
                        vd_prev: float, rule: str = "backward_euler",
                        i_prev: tuple[float, float] = (0.0, 0.0),
                        m: float = 1.0):
    """Companion pairs for the two lumped FET capacitors.

    Returns ((geq_gs, ihist_gs), (geq_dg, ihist_dg)) so that the branch
    currents for the step are i_gs = geq_gs*vgs + ihist_gs (gate to source)
    and i_dg = geq_dg*vd + ihist_dg (drain to ground).  With unchanged
    voltages the history term cancels the conductance term exactly.
    """
    gs = cap_companion(card.cg * m, vgs_prev, i_prev[0], dt, rule)
    dg = cap_companion(card.cd * m, vd_prev, i_prev[1], dt, rule)
    return gs, dg


@dataclass(frozen=True)
class TechnologyCard:
    """A named pair of N/P cards plus a free-text provenance note."""

    name: str
    nfet: FetModelCard
    pfet: FetModelCard
    note: str = ""

    def __post_init__(self):
        if self.nfet.polarity != "n" or self.pfet.polarity != "p":
            raise ValueError("technology card needs one N and one P device")


# Behavioural 32 nm-class cards.  cmos32 k is calibrated so that a minimum
# inverter driving 1 fF at vdd = 1.2 V shows a 10-90% rise time within 2x of
# 174 ps (tools/calibrate_presets.py, which also checks the decoder-level
# rise window).  gnrfet32 keeps the same thresholds with ~30x the drive and
# 4x smaller parasitics, which is the modelled advantage of the graphene
# nanoribbon devices.
_CMOS32_NOTE = (
    "behavioural 32 nm CMOS card; k calibrated with tools/calibrate_presets.py "
    "so a minimum inverter driving 1 fF at 1.2 V rises (10-90%) within 2x of "
    "174 ps; lambda and caps are representative, not extracted"
)
_GNRFET32_NOTE = (
    "behavioural 32 nm GNRFET card derived from cmos32 by fixed "
    "ratios: same thresholds, k = 30x cmos32, cg/cd = cmos32/4"
)

_CMOS32_K = 3.35e-05
_CMOS32_CG = 8e-17
_CMOS32_CD = 6e-17

_PRESETS = {
    "cmos32": TechnologyCard(
        name="cmos32",
        nfet=FetModelCard("n", 0.3, _CMOS32_K, 0.05, _CMOS32_CG, _CMOS32_CD),
        pfet=FetModelCard("p", -0.3, _CMOS32_K, 0.05, _CMOS32_CG, _CMOS32_CD),
        note=_CMOS32_NOTE,
    ),
    "gnrfet32": TechnologyCard(
        name="gnrfet32",
        nfet=FetModelCard("n", 0.3, 30.0 * _CMOS32_K, 0.05, _CMOS32_CG / 4.0,
                          _CMOS32_CD / 4.0),
        pfet=FetModelCard("p", -0.3, 30.0 * _CMOS32_K, 0.05, _CMOS32_CG / 4.0,
                          _CMOS32_CD / 4.0),
        note=_GNRFET32_NOTE,
    ),
}


def preset(name: str) -> TechnologyCard:
    """Look up a built-in technology card by name."""
    try:
        return _PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown technology preset {name!r}; available: "
            + ", ".join(sorted(_PRESETS))
        ) from None


def preset_names() -> tuple[str, ...]:
    return tuple(_PRESETS)
