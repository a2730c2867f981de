import csv
import io
import math

import pytest
from hypothesis import given, strategies as st

from axiotherm import catalog
from axiotherm.core import shift_energy_origin
from axiotherm.equilibrium import (
    equilibrate_pair,
    gibbs_closure_residual,
    gibbs_forces,
    isentropic_energy,
    max_entropy_scan,
    mutual_equilibrium_predicate,
    reservoir_impossibility_audit,
)
from axiotherm.errors import DomainError

G1 = catalog.monoatomic_ideal_gas(1, 1)
G2 = catalog.monoatomic_ideal_gas(2, 1)


def test_partition_example():
    part = equilibrate_pair(G1.fr, G1.beta, G2.fr, G2.beta, 9.0)
    assert part.E_A_star == pytest.approx(3.0, abs=1e-9)
    assert part.E_B_star == pytest.approx(6.0, abs=1e-9)
    assert part.T_star == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("E_total", [2e-6, 1.0, 9.0, 1e4])
def test_identical_copies_split_evenly(E_total):
    part = equilibrate_pair(G1.fr, G1.beta, G1.fr, G1.beta, E_total)
    assert part.E_A_star == pytest.approx(E_total / 2, rel=1e-9)


def test_infeasible_total_energy():
    with pytest.raises(DomainError):
        equilibrate_pair(G1.fr, G1.beta, G2.fr, G2.beta, 0.0)


_PAIRS = st.sampled_from([
    (G1, G2),
    (catalog.quasi_reservoir(2.0, 50.0), catalog.power_law_system()),
    (catalog.power_law_system(2.0, 0.4, 1.5), catalog.monoatomic_ideal_gas(5, 2)),
])


@given(pair=_PAIRS, extra=st.floats(0.5, 50.0), a=st.floats(-20, 20), b=st.floats(-20, 20))
def test_partition_invariant_under_swap_and_origin_shift(pair, extra, a, b):
    A, B = pair
    E_total = A.fr.ground(A.beta) + B.fr.ground(B.beta) + extra
    part = equilibrate_pair(A.fr, A.beta, B.fr, B.beta, E_total)
    swapped = equilibrate_pair(B.fr, B.beta, A.fr, A.beta, E_total)
    assert swapped.E_B_star == pytest.approx(part.E_A_star, rel=1e-9, abs=1e-9)
    shifted = equilibrate_pair(shift_energy_origin(A.fr, a), A.beta, shift_energy_origin(B.fr, b), B.beta,
                               E_total + a + b)
    assert shifted.E_A_star - a == pytest.approx(part.E_A_star, rel=1e-8, abs=1e-8)


def test_scan_example_and_csv():
    scan = max_entropy_scan(G1.fr, G1.beta, G2.fr, G2.beta, 9.0, 101)
    assert scan.passed and scan.sign_flips == 1
    S0 = G1.fr.entropy(3.0, G1.beta) + G2.fr.entropy(6.0, G2.beta)
    S_half = [G1.fr.entropy(3.0 + e, G1.beta) + G2.fr.entropy(6.0 - e, G2.beta) for e in (-0.5, 0.5)]
    assert all(s < S0 for s in S_half)
    rows = list(csv.reader(io.StringIO(scan.to_csv())))
    assert rows[0] == ["epsilon", "S_total", "dSdeps"] and len(rows) == 102
    assert float(rows[51][0]) == 0.0


def test_symmetric_pair_profile_is_symmetric():
    scan = max_entropy_scan(G1.fr, G1.beta, G1.fr, G1.beta, 4.0, 21)
    for s, s_mirror in zip(scan.S_total, reversed(scan.S_total)):
        assert s == pytest.approx(s_mirror, rel=1e-12)


def test_scan_rejects_too_small_grid_and_oversized_width():
    with pytest.raises(ValueError):
        max_entropy_scan(G1.fr, G1.beta, G2.fr, G2.beta, 9.0, 2)
    with pytest.raises(DomainError):
        max_entropy_scan(G1.fr, G1.beta, G2.fr, G2.beta, 9.0, 11, half_width=3.0)


def test_mutual_equilibrium_examples():
    assert mutual_equilibrium_predicate(G1.state(3.0), G2.state(6.0))
    assert mutual_equilibrium_predicate(G1.state(3.0), G1.state(3.0))
    assert not mutual_equilibrium_predicate(G1.state(3.0), G1.state(1.5))


def test_pressure_examples():
    assert gibbs_forces(G1.fr, G1.beta, 1.5).pressure == pytest.approx(1.0, rel=1e-9)
    pl = catalog.power_law_system(1.0, 0.75, 1.0)
    assert gibbs_forces(pl.fr, pl.beta, 1.0).pressure == pytest.approx(1.0 / 3.0, rel=1e-8)


def test_isentropic_volume_doubling_scales_pressure():
    S = G1.fr.entropy(1.5, G1.beta)
    big = G1.beta.replace(V=2.0)
    E_big = isentropic_energy(G1.fr, big, S)
    ratio = gibbs_forces(G1.fr, big, E_big).pressure / gibbs_forces(G1.fr, G1.beta, 1.5).pressure
    assert ratio == pytest.approx(2.0 ** (-5.0 / 3.0), rel=1e-8)


def test_force_near_parameter_bound_falls_back_to_one_sided():
    tiny = catalog.monoatomic_ideal_gas(1, 1e-10)
    # the 1e-9 step floor exceeds V itself, so only a forward difference fits
    forces = gibbs_forces(tiny.fr, tiny.beta, 1.5)
    assert forces.one_sided == ("V",)
    assert forces.pressure == pytest.approx(1.0 / 1e-10, rel=1e-6)


@given(E=st.floats(0.5, 10.0), V=st.floats(0.5, 5.0))
def test_gibbs_closure_residual_is_small_at_small_steps(E, V):
    gas = catalog.monoatomic_ideal_gas(1, V)
    T = gas.fr.temperature(E, gas.beta)
    h = 1e-3
    r = gibbs_closure_residual(gas.fr, gas.beta, E, h * E / T, {"V": -h * V})
    assert abs(r) <= 1e-4 * E


def test_reservoir_audit_examples():
    audit = reservoir_impossibility_audit(G1.fr, G1.beta, [0.5, 1.0, 2.0, 4.0])
    assert audit.passed
    q = catalog.quasi_reservoir(273.16, 1e6, 0.0)
    qa = reservoir_impossibility_audit(q.fr, q.beta, [0.0, 1.0])
    assert qa.passed
    assert qa.metrics["reservoir_quality"] == pytest.approx(1e-6 / 273.16, rel=1e-6)
    flat = catalog.constant_temperature(1.0)
    fa = reservoir_impossibility_audit(flat.fr, flat.beta, [0.5, 1.0, 2.0])
    assert not fa.passed and "reservoir" in fa["distinct-temperatures"].detail
