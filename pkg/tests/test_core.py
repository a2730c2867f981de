import math

import pytest
from hypothesis import given, strategies as st

from axiotherm import catalog
from axiotherm.core import (
    CompositeState,
    FundamentalRelation,
    ModelParams,
    NonEqState,
    StableEqState,
    ds_de,
    entropy_of,
    invert_fundamental,
    shift_energy_origin,
    temperature_of,
    validate_model,
)
from axiotherm.errors import BracketError, DomainError, ModelInvariantError

GAS = catalog.monoatomic_ideal_gas(1, 1)
GAS2 = catalog.monoatomic_ideal_gas(2, 1)
QUASI = catalog.quasi_reservoir(273.16, 1e6, 0.0)


def test_entropy_examples():
    assert entropy_of(GAS.state(1.0)) == 0.0
    assert entropy_of(GAS.state(1.5)) == pytest.approx(1.5 * math.log(1.5), rel=1e-15)
    assert entropy_of(GAS.state(1.5)) == pytest.approx(0.608198, abs=1e-6)
    assert entropy_of(NonEqState(GAS.fr, 2.0, GAS.beta, 0.3)) == 0.3


def test_temperature_examples():
    assert temperature_of(GAS.state(1.5)) == 1.0
    assert temperature_of(GAS2.state(6.0)) == 2.0
    assert temperature_of(QUASI.state(0.0)) == 273.16


def test_temperature_without_closed_form_uses_the_derivative():
    bare = FundamentalRelation("bare_gas", s_se=lambda E, b: 1.5 * math.log(E), e_ground=lambda b: 0.0)
    beta = bare.params()
    assert bare.temperature(1.5, beta) == pytest.approx(1.0, rel=1e-10)


def test_non_positive_derivative_is_invariant_violation():
    broken = catalog.decreasing_entropy()
    with pytest.raises(ModelInvariantError):
        broken.fr.temperature(1.0, broken.beta)


def test_energy_at_or_below_ground_rejected():
    with pytest.raises(DomainError):
        GAS.state(0.0)
    with pytest.raises(DomainError):
        GAS.fr.entropy(-1.0, GAS.beta)


def test_parameters_validated():
    with pytest.raises(DomainError):
        GAS.fr.params(N=1.0, V=-1.0)
    with pytest.raises(DomainError):
        GAS.fr.params(N=1.0)
    with pytest.raises(DomainError):
        StableEqState(GAS.fr, 1.0, catalog.power_law_system().beta)
    beta = GAS.beta.replace(V=2.0)
    assert beta["V"] == 2.0 and beta["N"] == 1.0 and GAS.beta["V"] == 1.0
    with pytest.raises(KeyError):
        GAS.beta.replace(W=1.0)


def test_nonequilibrium_entropy_must_lie_below_stable_value():
    S_max = entropy_of(GAS.state(2.0))
    with pytest.raises(DomainError):
        NonEqState(GAS.fr, 2.0, GAS.beta, S_max)
    relaxed = NonEqState(GAS.fr, 2.0, GAS.beta, S_max - 0.1).relaxed()
    assert relaxed == GAS.state(2.0)


def test_states_are_identified_by_model_energy_and_parameters():
    assert GAS.state(2.0) == catalog.monoatomic_ideal_gas(1, 1).state(2.0)
    assert GAS.state(2.0) != GAS2.state(2.0)
    assert GAS.state(2.0) != catalog.monoatomic_ideal_gas(1, 2).state(2.0)


def test_composite_state_sums_energy_and_entropy():
    c = CompositeState((GAS.state(1.5), GAS2.state(6.0)))
    assert c.E == 7.5
    assert entropy_of(c) == pytest.approx(entropy_of(GAS.state(1.5)) + entropy_of(GAS2.state(6.0)), rel=1e-15)
    assert c.replace_part(0, GAS.state(3.0)).E == 9.0
    with pytest.raises(TypeError):
        temperature_of(c)


def test_inversion_examples():
    assert invert_fundamental(GAS.fr, GAS.beta, 0.0) == pytest.approx(1.0, rel=1e-14)
    E = invert_fundamental(QUASI.fr, QUASI.beta, 1e6 * math.log(2.0))
    assert E == pytest.approx(1e6 * 273.16, rel=1e-12)


def test_inversion_outside_range():
    pl = catalog.power_law_system()
    with pytest.raises(BracketError):
        invert_fundamental(pl.fr, pl.beta, -1.0)
    with pytest.raises(BracketError):
        invert_fundamental(GAS.fr, GAS.beta, math.inf)


_ENTRIES = st.sampled_from([
    catalog.monoatomic_ideal_gas(4, 0.7),
    catalog.quasi_reservoir(3.0, 500.0, -2.0),
    catalog.power_law_system(2.0, 0.4, 3.0),
])


@given(entry=_ENTRIES, d=st.floats(1e-4, 1e4))
def test_inversion_round_trip(entry, d):
    E = entry.fr.ground(entry.beta) + d
    back = invert_fundamental(entry.fr, entry.beta, entry.fr.entropy(E, entry.beta))
    assert back == pytest.approx(E, rel=1e-9)


@given(entry=_ENTRIES, d=st.floats(1e-3, 1e3))
def test_temperature_matches_numeric_derivative(entry, d):
    E = entry.fr.ground(entry.beta) + d
    assert entry.fr.temperature(E, entry.beta) == pytest.approx(1.0 / ds_de(entry.fr, entry.beta, E), rel=1e-6)


@given(entry=_ENTRIES, d1=st.floats(1e-3, 1e3), ratio=st.floats(1.001, 100.0))
def test_entropy_and_temperature_increase_with_energy(entry, d1, ratio):
    g = entry.fr.ground(entry.beta)
    E1, E2 = g + d1, g + d1 * ratio
    assert entry.fr.entropy(E2, entry.beta) > entry.fr.entropy(E1, entry.beta)
    assert entry.fr.temperature(E2, entry.beta) > entry.fr.temperature(E1, entry.beta)


def test_validate_model_passes_for_ideal_gas():
    report = validate_model(GAS.fr, GAS.beta, [0.5, 1, 2, 4])
    assert report.passed
    assert set(report.check_ids()) == {"grid-domain", "S-monotone", "T-positive", "T-monotone", "T-ground-limit"}


def test_validate_model_flags_decreasing_entropy():
    broken = catalog.decreasing_entropy()
    report = validate_model(broken.fr, broken.beta, [0.5, 1, 2, 4])
    assert not report.passed
    assert not report["S-monotone"].passed


def test_validate_model_quasi_reservoir_slope_is_inverse_capacity():
    report = validate_model(QUASI.fr, QUASI.beta, [0.0, 2.5e5, 5e5, 7.5e5, 1e6])
    assert report.passed
    assert report.metrics["min_dT_dE"] == pytest.approx(1e-6, rel=1e-9)
    assert report.metrics["max_dT_dE"] == pytest.approx(1e-6, rel=1e-9)


def test_validate_model_rejects_grid_below_ground():
    report = validate_model(GAS.fr, GAS.beta, [-1.0, 1.0])
    assert not report["grid-domain"].passed and not report.passed


def test_validate_model_flags_constant_temperature_limit():
    flat = catalog.constant_temperature(1.0)
    report = validate_model(flat.fr, flat.beta, [0.5, 1.0, 2.0])
    assert not report["T-monotone"].passed
    assert not report["T-ground-limit"].passed


def test_shifted_origin_moves_energies_only():
    shifted = shift_energy_origin(GAS.fr, 10.0)
    assert shifted.ground(GAS.beta) == 10.0
    assert shifted.entropy(11.5, GAS.beta) == GAS.fr.entropy(1.5, GAS.beta)
    assert shifted.temperature(11.5, GAS.beta) == 1.0
