import math

import pytest
from hypothesis import given, strategies as st

from axiotherm import catalog
from axiotherm.core import entropy_of, invert_fundamental
from axiotherm.errors import DomainError, IrreversibilityError
from axiotherm.meter import (
    ReferenceCalibration,
    build_map,
    calibrated_temperature,
    entropy_of_state,
    measure_entropy_difference,
    temperature_ratio,
)
from axiotherm.processes import standard_process

GAS1 = catalog.monoatomic_ideal_gas(1, 1)
GAS2 = catalog.monoatomic_ideal_gas(2, 1)
POWER = catalog.power_law_system(1.0, 0.75, 1.0)
QUASI = catalog.quasi_reservoir(273.16, 1e6, 0.0)


def test_map_between_equal_temperature_gases():
    f = build_map(GAS1.state(1.5), GAS2.state(3.0))
    # equal entropy change: 1.5 ln(E/1.5) = 3 ln(E_C/3)
    assert f(3.0) == pytest.approx(3.0 * math.sqrt(2.0), rel=1e-12)
    assert f.inverse(f(3.0)) == pytest.approx(3.0, rel=1e-12)


def test_temperature_ratio_examples():
    assert temperature_ratio(GAS1.state(1.5), GAS2.state(3.0)) == pytest.approx(1.0, rel=1e-9)
    assert temperature_ratio(GAS1.state(1.5), GAS1.state(1.5)) == 1.0
    assert temperature_ratio(GAS1.state(1.5), GAS1.state(3.0)) == pytest.approx(2.0, rel=1e-9)


def test_calibrated_temperature_examples():
    ref = QUASI.state(0.0)
    cal = ReferenceCalibration(ref, 273.16)
    assert calibrated_temperature(ref, cal) == 273.16
    cold = catalog.quasi_reservoir(1.0, 1e6, 0.0).state(0.0)
    T = calibrated_temperature(GAS1.state(1.5), ReferenceCalibration(cold, 1.0))
    assert T == pytest.approx(1.0, abs=1e-6)


def test_map_refuses_to_reach_the_ground_state():
    f = build_map(GAS1.state(1.5), POWER.state(1e-3))
    with pytest.raises(DomainError):
        f(0.01)


def test_entropy_measurement_example():
    gas = GAS1
    proc = standard_process(gas.state(3.0), gas.state(1.5), gas.state(1.5))
    assert proc.B_final.E == pytest.approx(3.0, rel=1e-12)
    assert measure_entropy_difference(proc).value == pytest.approx(-1.5 * math.log(2.0), rel=1e-12)


def test_identity_transition_measures_zero():
    proc = standard_process(GAS1.state(2.0), GAS1.state(2.0), GAS2.state(1.0))
    assert proc.B_final == proc.B_initial
    assert measure_entropy_difference(proc).value == 0.0


def test_measurement_does_not_depend_on_meter():
    A1, A2 = GAS1.state(3.0), GAS1.state(1.5)
    via_gas = measure_entropy_difference(standard_process(A1, A2, GAS1.state(1.5))).value
    via_power = measure_entropy_difference(standard_process(A1, A2, POWER.state(2.0))).value
    via_quasi = measure_entropy_difference(standard_process(A1, A2, catalog.quasi_reservoir(1.0, 100.0).state(0.0))).value
    assert via_power == pytest.approx(via_gas, rel=1e-8)
    assert via_quasi == pytest.approx(via_gas, rel=1e-8)


def test_irreversible_process_refused():
    proc = standard_process(GAS1.state(3.0), GAS1.state(1.5), GAS1.state(1.5), sigma=0.2)
    with pytest.raises(IrreversibilityError):
        measure_entropy_difference(proc)


def test_entropy_of_state_examples():
    A0 = GAS1.state(1.0)
    meter = GAS2.state(3.0)
    assert entropy_of_state(A0, A0, 0.0, meter) == 0.0
    assert entropy_of_state(GAS1.state(1.5), A0, 0.0, meter) == pytest.approx(0.608198, abs=1e-6)


def test_entropy_chain_equals_direct_measurement():
    A0, A1, A2 = GAS1.state(1.0), GAS1.state(1.5), GAS1.state(4.0)
    meter = POWER.state(5.0)
    s1 = entropy_of_state(A1, A0, 0.0, meter)
    chained = entropy_of_state(A2, A1, s1, meter)
    direct = entropy_of_state(A2, A0, 0.0, meter)
    assert chained == pytest.approx(direct, abs=2e-10)


_STATES = st.sampled_from([GAS1.state(1.5), GAS2.state(5.0), POWER.state(3.0), catalog.quasi_reservoir(2.0, 40.0).state(1.0)])


@given(B=_STATES, C=_STATES, s1=st.floats(-0.8, 0.8), s2=st.floats(-0.8, 0.8))
def test_map_is_strictly_increasing(B, C, s1, s2):
    f = build_map(B, C)
    E1 = invert_fundamental(B.fr, B.beta, entropy_of(B) + min(s1, s2))
    E2 = invert_fundamental(B.fr, B.beta, entropy_of(B) + max(s1, s2))
    if E2 > E1:
        assert f(E2) > f(E1)


@given(B=_STATES, C=_STATES)
def test_map_slope_is_temperature_ratio(B, C):
    f = build_map(B, C)
    expected = C.fr.temperature(C.E, C.beta) / B.fr.temperature(B.E, B.beta)
    assert f.derivative_at(B.E) == pytest.approx(expected, rel=1e-6)
    assert f.inverse_derivative_at(C.E) * f.derivative_at(B.E) == pytest.approx(1.0, rel=1e-6)
