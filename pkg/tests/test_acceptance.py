"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed in the summary.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
import random
import time

from axiotherm import catalog
from axiotherm.core import CompositeState, entropy_of, temperature_of
from axiotherm.equilibrium import equilibrate_pair, gibbs_forces, max_entropy_scan, reservoir_impossibility_audit
from axiotherm.meter import build_map, measure_entropy_difference, temperature_ratio
from axiotherm.numerics import integrate_inverse_T
from axiotherm.processes import (
    check_pmm2,
    compose,
    lemma7_bound,
    process_of_A_alone,
    standard_process,
)
from axiotherm.verify import (
    FAMILIES,
    closure_orders,
    direction_off_scaling_ray,
    entropy_grid,
    log_grid,
    meter_for,
    random_entry,
    random_state,
    random_thermo_state,
    random_transition,
    state_with_entropy,
    two_leg_process,
    verify_all,
)

# tolerances, fixed by the acceptance criteria
METER_REL_TOL = 1e-8
CANONICAL_TOL = 1e-9
METER_RUNTIME_S = 10.0
INDEPENDENCE_TOL = 1e-8
TEMPERATURE_TOL = 1e-6
GAP_TOL = 1e-8
ADDITIVITY_TOL = 1e-8
PARTITION_TOL = 1e-9
SCAN_POINTS = 101
PRESSURE_TOL = 1e-6
MIN_ORDER = 1.9
VERIFY_RUNTIME_S = 60.0


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_ac1_entropy_meter(acceptance_log):
    rng = random.Random("acceptance:1")
    start = time.perf_counter()
    worst = 0.0
    for i in range(500):
        A1, A2, dS = random_transition(rng)
        _, proc = meter_for(rng, FAMILIES[i % 3], A1, A2)
        worst = max(worst, _rel(measure_entropy_difference(proc).value, dS))
    elapsed = time.perf_counter() - start
    gas = catalog.monoatomic_ideal_gas(1, 1)
    oracle = 1.5 * math.log(2.0)
    integral = integrate_inverse_T(gas.fr, gas.beta, 1.5, 3.0).value
    measured = measure_entropy_difference(standard_process(gas.state(3.0), gas.state(1.5), gas.state(1.5))).value
    canon = max(_rel(integral, oracle), _rel(-measured, oracle))
    ok = worst <= METER_REL_TOL and canon <= CANONICAL_TOL and elapsed < METER_RUNTIME_S
    acceptance_log("AC1", ok, f"500 triples worst rel {worst:.2e} (tol {METER_REL_TOL:g}); "
                              f"1.5 ln 2 rel {canon:.2e} (tol {CANONICAL_TOL:g}); {elapsed:.2f} s (< {METER_RUNTIME_S:g} s)")
    assert ok


def test_ac2_meter_independence(acceptance_log):
    rng = random.Random("acceptance:2")
    worst = 0.0
    for _ in range(200):
        A1, A2, dS = random_transition(rng)
        values = [measure_entropy_difference(meter_for(rng, fam, A1, A2)[1]).value for fam in FAMILIES]
        worst = max(worst, (max(values) - min(values)) / abs(dS))
    ok = worst <= INDEPENDENCE_TOL
    acceptance_log("AC2", ok, f"200 transitions x 3 meter families, worst pairwise rel {worst:.2e} (tol {INDEPENDENCE_TOL:g})")
    assert ok


def test_ac3_temperature_machinery(acceptance_log):
    rng = random.Random("acceptance:3")
    ratio_worst = 0.0
    for _ in range(500):
        B = random_state(rng, random_entry(rng, rng.choice(FAMILIES)))
        C = random_state(rng, random_entry(rng, rng.choice(FAMILIES)))
        ratio_worst = max(ratio_worst, _rel(temperature_ratio(B, C), temperature_of(C) / temperature_of(B)))

    comp_worst = recip_worst = 0.0
    points = 0
    for _ in range(6):
        B, R, C = (random_state(rng, random_entry(rng, fam)) for fam in rng.sample(FAMILIES, 3))
        f_BC, f_BR, f_RC = build_map(B, C), build_map(B, R), build_map(R, C)
        grid = entropy_grid(B, 1.0, 50)
        for E in grid:
            comp_worst = max(comp_worst, _rel(f_RC(f_BR(E)), f_BC(E)))
            recip_worst = max(recip_worst, abs(f_BC.inverse_derivative_at(f_BC(E)) * f_BC.derivative_at(E) - 1.0))
        points += len(grid)

    refs = (catalog.quasi_reservoir(T0=1.0, C=1e3).state(0.0), catalog.monoatomic_ideal_gas(2, 1).state(3.0))
    ref_worst = 0.0
    for _ in range(100):
        B = random_state(rng, random_entry(rng, rng.choice(FAMILIES)))
        C = random_state(rng, random_entry(rng, rng.choice(FAMILIES)))
        direct = temperature_ratio(B, C)
        for R in refs:
            ref_worst = max(ref_worst, _rel(temperature_ratio(R, C) / temperature_ratio(R, B), direct))

    worst = max(ratio_worst, comp_worst, recip_worst, ref_worst)
    ok = worst <= TEMPERATURE_TOL
    acceptance_log("AC3", ok, f"ratio {ratio_worst:.2e}, composition {comp_worst:.2e}, reciprocal {recip_worst:.2e} "
                              f"({points} grid points), reference choice {ref_worst:.2e} (tol {TEMPERATURE_TOL:g})")
    assert ok


def test_ac4_second_law_suite(acceptance_log):
    rng = random.Random("acceptance:4")
    # minimum at sigma = 0, strictly increasing in sigma
    increasing = True
    for i in range(200):
        A1, A2, _ = random_transition(rng)
        start, rev = meter_for(rng, FAMILIES[i % 3], A1, A2)
        sigmas = sorted(rng.uniform(1e-3, 1.0) for _ in range(5))
        energies = [rev.B_final.E] + [standard_process(A1, A2, start, s).B_final.E for s in sigmas]
        increasing &= all(b > a for a, b in zip(energies, energies[1:]))

    # processes of A alone: zero entropy change exactly for reversible, positive otherwise
    classified = True
    for i in range(200):
        entry = random_entry(rng, FAMILIES[i % 3])
        A1 = random_thermo_state(rng, entry)
        sigma = 0.0 if i % 2 == 0 else rng.uniform(1e-3, 1.0)
        A2 = state_with_entropy(rng, entry, entropy_of(A1) + sigma, p_noneq=1.0 if sigma == 0 else 0.5)
        proc = process_of_A_alone(A1, A2, random_state(rng, random_entry(rng, "ideal_gas")))
        measured = measure_entropy_difference(meter_for(rng, rng.choice(FAMILIES), A1, A2)[1]).value
        if sigma == 0:
            classified &= proc.reversible and proc.sigma == 0 and abs(measured) <= GAP_TOL
        else:
            classified &= (not proc.reversible) and proc.sigma > 0 and measured > 0

    # irreversible meter integral falls short by exactly sigma
    gap_worst = 0.0
    strict = True
    for i in range(200):
        A1, A2, _ = random_transition(rng)
        sigma = 10 ** rng.uniform(-3, 0)
        bound = lemma7_bound(meter_for(rng, FAMILIES[i % 3], A1, A2, sigma)[1])
        strict &= bound.holds
        gap_worst = max(gap_worst, abs(bound.gap - sigma))

    # no positive work from a stable state at fixed parameters
    rejected = 0
    proposals = 0
    for i in range(200):
        entry = random_entry(rng, FAMILIES[i % 3])
        A = random_state(rng, entry)
        w = (A.E - entry.fr.ground(entry.beta)) * rng.uniform(1e-3, 2.0)
        rejected += not check_pmm2(A, w, False).accepted
        proposals += 1

    ok = increasing and classified and strict and gap_worst <= GAP_TOL and rejected == proposals
    acceptance_log("AC4", ok, f"minimum at sigma=0 {'ok' if increasing else 'VIOLATED'}; "
                              f"sign classification {'ok' if classified else 'VIOLATED'}; "
                              f"gap-sigma worst {gap_worst:.2e} (tol {GAP_TOL:g}); "
                              f"work-from-stable rejected {rejected}/{proposals}")
    assert ok


def test_ac5_additivity(acceptance_log):
    rng = random.Random("acceptance:5")
    worst = 0.0
    for i in range(200):
        A1, A2, dSA = random_transition(rng)
        X1, X2, dSX = random_transition(rng)
        C1, Cm, C2 = CompositeState((A1, X1)), CompositeState((A2, X1)), CompositeState((A2, X2))
        D, _ = meter_for(rng, FAMILIES[i % 3], C1, C2)
        leg1, leg2 = two_leg_process(C1, Cm, C2, D)
        dSC = measure_entropy_difference(compose([leg1, leg2])).value
        dA = measure_entropy_difference(meter_for(rng, rng.choice(FAMILIES), A1, A2)[1]).value
        dX = measure_entropy_difference(meter_for(rng, rng.choice(FAMILIES), X1, X2)[1]).value
        worst = max(worst, abs(dSC - (dA + dX)) / (abs(dSA) + abs(dSX)))
    ok = worst <= ADDITIVITY_TOL
    acceptance_log("AC5", ok, f"200 composites, worst rel {worst:.2e} (tol {ADDITIVITY_TOL:g})")
    assert ok


def test_ac6_equilibrium(acceptance_log):
    g1, g2 = catalog.monoatomic_ideal_gas(1, 1), catalog.monoatomic_ideal_gas(2, 1)
    part = equilibrate_pair(g1.fr, g1.beta, g2.fr, g2.beta, 9.0)
    err = max(abs(part.E_A_star - 3.0), abs(part.E_B_star - 6.0), abs(part.T_star - 2.0))
    instances = {
        "ideal_gas": catalog.monoatomic_ideal_gas(2, 1),
        "quasi_reservoir": catalog.quasi_reservoir(T0=2.0, C=50.0),
        "power_law": catalog.power_law_system(1.0, 0.75, 1.0),
    }
    failed = []
    for a in FAMILIES:
        for b in FAMILIES:
            A, B = instances[a], instances[b]
            E_total = A.fr.ground(A.beta) + B.fr.ground(B.beta) + 10.0
            scan = max_entropy_scan(A.fr, A.beta, B.fr, B.beta, E_total, SCAN_POINTS)
            if not (scan.passed and len(scan.epsilon) == SCAN_POINTS):
                failed.append(f"{a}/{b}")
    ok = err <= PARTITION_TOL and not failed
    acceptance_log("AC6", ok, f"(3, 6, T=2) error {err:.2e} (tol {PARTITION_TOL:g}); "
                              f"{SCAN_POINTS}-point scans passed {9 - len(failed)}/9 catalog pairs")
    assert ok


def test_ac7_gibbs_relation(acceptance_log):
    rng = random.Random("acceptance:7")
    p_worst = 0.0
    for _ in range(100):
        V = rng.uniform(0.5, 5.0)
        E = 10 ** rng.uniform(-1.0, 1.0)
        gas = catalog.monoatomic_ideal_gas(N=1, V=V)
        forces = gibbs_forces(gas.fr, gas.beta, E)
        p_worst = max(p_worst, _rel(forces.pressure, temperature_of(gas.state(E)) / V))
    order_min = math.inf
    for i in range(20):
        entry = random_entry(rng, ("ideal_gas", "power_law")[i % 2])
        state = random_state(rng, entry)
        S_rel = entropy_of(state) * temperature_of(state) / (state.E - entry.fr.ground(entry.beta))
        _, orders = closure_orders(entry, state.E, direction_off_scaling_ray(rng, S_rel, len(entry.beta)))
        order_min = min([order_min] + orders)
    ok = p_worst <= PRESSURE_TOL and order_min >= MIN_ORDER
    acceptance_log("AC7", ok, f"pressure = T/V worst rel {p_worst:.2e} (tol {PRESSURE_TOL:g}) over 100 (E, V); "
                              f"closure order min {order_min:.3f} (>= {MIN_ORDER:g})")
    assert ok


def test_ac8_reservoir_impossibility_and_suite(acceptance_log):
    rng = random.Random("acceptance:8")
    entries = [random_entry(rng, fam) for fam in FAMILIES for _ in range(5)]
    monotone = 0
    for entry in entries:
        grid = log_grid(entry, decades=6.0, points=61)
        T = [entry.fr.temperature(E, entry.beta) for E in grid]
        monotone += all(b > a for a, b in zip(T, T[1:]))
    flat = catalog.constant_temperature(1.0)
    flagged = not reservoir_impossibility_audit(flat.fr, flat.beta, [0.5, 1.0, 2.0]).passed

    start = time.perf_counter()
    first = verify_all(seed=0, cases_per_check=200)
    elapsed = time.perf_counter() - start
    second = verify_all(seed=0, cases_per_check=200)
    deterministic = first.to_json() == second.to_json() and first.to_csv() == second.to_csv()
    ok = monotone == len(entries) and flagged and first.passed and elapsed < VERIFY_RUNTIME_S and deterministic
    acceptance_log("AC8", ok, f"T increasing over 6 decades on {monotone}/{len(entries)} models; "
                              f"constant-T flagged: {flagged}; verify {first.status} in {elapsed:.1f} s "
                              f"(< {VERIFY_RUNTIME_S:g} s); byte-deterministic: {deterministic}")
    assert ok
