"""Device model unit tests.

Expected currents and derivatives are frozen from hand evaluation of the
square law, not from the code under test.
"""

import numpy as np
import pytest

from mvlsim.devices import (
    FetModelCard,
    TechnologyCard,
    cap_companion,
    fet_charge_currents,
    fet_eval,
    preset,
    preset_names,
)

N = FetModelCard("n", 0.3, 1e-4, 0.05, 8e-17, 6e-17)
P = FetModelCard("p", -0.3, 1e-4, 0.05, 8e-17, 6e-17)


class TestRegions:
    def test_cutoff_is_exactly_zero(self):
        for vgs in (0.3, 0.2, 0.0, -1.0):
            assert fet_eval(N, vgs, 1.0) == (0.0, 0.0, 0.0)

    def test_saturation_oracle(self):
        # vov=0.6, cl=1.05: i = 0.5*1e-4*0.36*1.05, gm = 1e-4*0.6*1.05,
        # gds = 0.5*1e-4*0.36*0.05 (hand computed)
        i, gm, gds = fet_eval(N, 0.9, 1.0)
        assert i == pytest.approx(1.89e-5, rel=1e-12)
        assert gm == pytest.approx(6.3e-5, rel=1e-12)
        assert gds == pytest.approx(9e-7, rel=1e-12)

    def test_triode_oracle(self):
        # vov=0.6, vds=0.2, cl=1.01, q=0.1: i = 1e-4*0.1*1.01,
        # gm = 1e-4*0.2*1.01, gds = 1e-4*0.4*1.01 + 1e-4*0.1*0.05
        i, gm, gds = fet_eval(N, 0.9, 0.2)
        assert i == pytest.approx(1.01e-5, rel=1e-12)
        assert gm == pytest.approx(2.02e-5, rel=1e-12)
        assert gds == pytest.approx(4.09e-5, rel=1e-12)

    def test_saturation_without_lambda(self):
        card = FetModelCard("n", 0.3, 2e-4, 0.0, 0.0)
        i, gm, gds = fet_eval(card, 1.2, 2.0)
        assert i == pytest.approx(8.1e-5, rel=1e-12)
        assert gm == pytest.approx(1.8e-4, rel=1e-12)
        assert gds == 0.0

    def test_current_increases_with_vgs_and_vds(self):
        i1 = fet_eval(N, 0.7, 0.6)[0]
        i2 = fet_eval(N, 0.9, 0.6)[0]
        i3 = fet_eval(N, 0.9, 1.1)[0]
        assert 0.0 < i1 < i2 < i3


class TestSymmetries:
    def test_p_mirrors_n_exactly(self):
        for vgs in (-1.2, -0.7, -0.4, 0.0, 0.5):
            for vds in (-1.2, -0.3, 0.0, 0.4, 1.0):
                ip, gmp, gdsp = fet_eval(P, vgs, vds)
                inn, gmn, gdsn = fet_eval(N, -vgs, -vds)
                assert ip == -inn
                assert gmp == gmn
                assert gdsp == gdsn

    def test_reversed_conduction_is_antisymmetric(self):
        # swapping drain and source negates the current: the device with
        # (vgs, vds) equals minus the device with (vgs - vds, -vds).
        # dyadic voltages keep vgs - vds exact so the match is bitwise
        for vgs in (0.5, 1.0, 1.25):
            for vds in (0.25, 0.5, 1.0):
                i_fwd, gm_fwd, gds_fwd = fet_eval(N, vgs, vds)
                i_rev, gm_rev, gds_rev = fet_eval(N, vgs - vds, -vds)
                assert i_rev == -i_fwd
                assert gm_rev == -gm_fwd
                assert gds_rev == gm_fwd + gds_fwd

    def test_reverse_region_conducts(self):
        i, _, _ = fet_eval(N, 0.9, -0.5)
        assert i < 0.0

    def test_continuity_through_vds_zero(self):
        eps = 1e-9
        below = fet_eval(N, 0.9, -eps)[0]
        above = fet_eval(N, 0.9, eps)[0]
        assert abs(below - above) < 1e-12


class TestContinuity:
    def test_pinchoff_boundary_values_and_slopes(self):
        vgs = 0.9
        vov = vgs - N.vth
        eps = 1e-9
        tri = fet_eval(N, vgs, vov - eps)
        sat = fet_eval(N, vgs, vov + eps)
        for a, b in zip(tri, sat):
            assert a == pytest.approx(b, rel=1e-6, abs=1e-12)

    def test_pinchoff_boundary_exact_match(self):
        # at vds == vov both region formulas coincide algebraically
        vgs, k, lam = 0.9, N.k, N.lam
        vov = vgs - N.vth
        i, gm, gds = fet_eval(N, vgs, vov)
        cl = 1.0 + lam * vov
        assert i == pytest.approx(0.5 * k * vov * vov * cl, rel=1e-15)
        assert gm == pytest.approx(k * vov * cl, rel=1e-15)
        assert gds == pytest.approx(0.5 * k * vov * vov * lam, rel=1e-15)

    def test_cutoff_boundary(self):
        eps = 1e-9
        i_below = fet_eval(N, N.vth - eps, 0.8)[0]
        i_above = fet_eval(N, N.vth + eps, 0.8)[0]
        assert i_below == 0.0
        assert abs(i_above) < 1e-12


class TestDerivatives:
    @pytest.mark.parametrize("card", [N, P], ids=["nfet", "pfet"])
    def test_finite_difference_agreement(self, card):
        rng = np.random.default_rng(20260814)
        h = 1e-6
        checked = 0
        while checked < 100:
            vgs = float(rng.uniform(-1.5, 1.5))
            vds = float(rng.uniform(-1.5, 1.5))
            vg, vd = (vgs, vds) if card.polarity == "n" else (-vgs, -vds)
            vth = abs(card.vth)
            # skip points near region boundaries where C1 but not C2
            if min(abs(vg - vth), abs(vd), abs(vg - vth - vd)) < 1e-3:
                continue
            _, gm, gds = fet_eval(card, vgs, vds)
            fd_gm = (fet_eval(card, vgs + h, vds)[0]
                     - fet_eval(card, vgs - h, vds)[0]) / (2 * h)
            fd_gds = (fet_eval(card, vgs, vds + h)[0]
                      - fet_eval(card, vgs, vds - h)[0]) / (2 * h)
            assert gm == pytest.approx(fd_gm, rel=1e-6, abs=1e-12)
            assert gds == pytest.approx(fd_gds, rel=1e-6, abs=1e-12)
            checked += 1


class TestCardValidation:
    def test_polarity_checked(self):
        with pytest.raises(ValueError):
            FetModelCard("x", 0.3, 1e-4, 0.0, 0.0)

    def test_threshold_sign_convention(self):
        with pytest.raises(ValueError):
            FetModelCard("n", -0.1, 1e-4, 0.0, 0.0)
        with pytest.raises(ValueError):
            FetModelCard("p", 0.1, 1e-4, 0.0, 0.0)

    def test_positive_k(self):
        with pytest.raises(ValueError):
            FetModelCard("n", 0.3, 0.0, 0.0, 0.0)

    def test_nonnegative_lambda_and_caps(self):
        with pytest.raises(ValueError):
            FetModelCard("n", 0.3, 1e-4, -0.01, 0.0)
        with pytest.raises(ValueError):
            FetModelCard("n", 0.3, 1e-4, 0.0, -1e-18)
        with pytest.raises(ValueError):
            FetModelCard("n", 0.3, 1e-4, 0.0, 0.0, -1e-18)

    def test_technology_card_needs_both_polarities(self):
        with pytest.raises(ValueError):
            TechnologyCard("t", nfet=N, pfet=N)


class TestCompanions:
    def test_backward_euler_values(self):
        geq, ihist = cap_companion(1e-12, 0.5, 0.0, 1e-9, "backward_euler")
        assert geq == 1e-12 / 1e-9
        assert ihist == -geq * 0.5

    def test_trapezoidal_values(self):
        geq, ihist = cap_companion(1e-12, 0.5, 3e-6, 1e-9, "trapezoidal")
        assert geq == 2.0 * 1e-12 / 1e-9
        assert ihist == -geq * 0.5 - 3e-6

    def test_zero_capacitance_is_open(self):
        assert cap_companion(0.0, 1.0, 1.0, 1e-9, "backward_euler") == (0.0, 0.0)

    def test_bad_dt_and_rule(self):
        with pytest.raises(ValueError):
            cap_companion(1e-12, 0.0, 0.0, 0.0, "backward_euler")
        with pytest.raises(ValueError):
            cap_companion(1e-12, 0.0, 0.0, 1e-9, "simpson")

    def test_linear_ramp_current(self):
        # 1.2 fF ramped at 1 V/ns carries C*dv/dt = 1.2 uA
        c, dt = 1.2e-15, 1e-12
        v0, v1 = 0.2, 0.2 + 1e-3
        geq, ihist = cap_companion(c, v0, 0.0, dt, "backward_euler")
        assert geq * v1 + ihist == pytest.approx(1.2e-6, rel=1e-12)

    def test_trapezoidal_ramp_steady_state(self):
        # seeded with the exact ramp current, trapezoidal keeps it constant
        c, dt, slope = 1e-15, 1e-12, 1e9
        i_prev = c * slope
        v0 = 0.4
        v1 = v0 + slope * dt
        geq, ihist = cap_companion(c, v0, i_prev, dt, "trapezoidal")
        assert geq * v1 + ihist == pytest.approx(i_prev, rel=1e-12)

    def test_fet_charge_equilibrium(self):
        for rule in ("backward_euler", "trapezoidal"):
            (ggs, hgs), (gdg, hdg) = fet_charge_currents(
                N, 1e-12, vgs_prev=0.7, vd_prev=1.1, rule=rule)
            assert ggs * 0.7 + hgs == pytest.approx(0.0, abs=1e-20)
            assert gdg * 1.1 + hdg == pytest.approx(0.0, abs=1e-20)

    def test_fet_charge_multiplier_scales_conductance(self):
        (g1, _), (d1, _) = fet_charge_currents(N, 1e-12, 0.0, 0.0)
        (g3, _), (d3, _) = fet_charge_currents(N, 1e-12, 0.0, 0.0, m=3.0)
        assert g3 == pytest.approx(3.0 * g1, rel=1e-15)
        assert d3 == pytest.approx(3.0 * d1, rel=1e-15)


class TestPresets:
    def test_names(self):
        assert preset_names() == ("cmos32", "gnrfet32")

    def test_unknown_name_lists_choices(self):
        with pytest.raises(ValueError, match="cmos32"):
            preset("finfet7")

    def test_cards_are_consistent(self):
        for name in preset_names():
            t = preset(name)
            assert t.name == name
            assert t.nfet.polarity == "n" and t.pfet.polarity == "p"
            assert t.nfet.vth == -t.pfet.vth
            assert t.nfet.k == t.pfet.k

    def test_gnrfet_ratios(self):
        cm, gn = preset("cmos32"), preset("gnrfet32")
        assert gn.nfet.k == 30.0 * cm.nfet.k
        assert gn.nfet.cg == cm.nfet.cg / 4.0
        assert gn.nfet.cd == cm.nfet.cd / 4.0
        assert gn.nfet.vth == cm.nfet.vth
        assert gn.pfet.vth == cm.pfet.vth
