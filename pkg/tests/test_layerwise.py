from __future__ import annotations

from fractions import Fraction
from itertools import islice

import pytest

from lll_toolkit.errors import (BudgetRefused, ContractViolation,
                                ExtractionTimeout, ModelError)
from lll_toolkit.model import (ConstraintSystem, StreamParams, VariableSpec,
                               avoiding_assignments, clause_event,
                               uniform_bit)
from lll_toolkit.tape import Tape
from lll_toolkit.engine import SATISFIED, run_stream
from lll_toolkit.families import ChainCnfFamily
from lll_toolkit.layerwise import (SystemQOracle, TableQOracle,
                                   approx_output_distribution,
                                   compute_assignment_prefix,
                                   extract_from_positive_probability,
                                   extract_positive_branch,
                                   stability_horizon)

F = Fraction


# --- stability horizons -------------------------------------------------------

def chain_family():
    return ChainCnfFamily(4, overlap=1, polarity_seed=7)


def chain_params():
    return StreamParams.constant(F(1, 4), F(1, 2))


def test_horizon_tree_size_term():
    # z/(1-z) = 1/2 and alpha = 1/2: smallest m with 2^-1 * 2^-m <= 1/16 is 3
    family = chain_family()
    params = StreamParams.constant(F(1, 3), F(1, 2))
    cert = stability_horizon(family, params, cell=0, delta=F(1, 8))
    # delta/(2*|events touching cell 0|) = 1/16; cell 0 touches event 0 only
    assert cert.budget_share == F(1, 16)
    assert cert.terms[0].m == 3


def test_horizon_isolated_event_ball():
    family = ChainCnfFamily(3, overlap=0, polarity_seed=1)  # disjoint clauses
    params = chain_params()
    cert = stability_horizon(family, params, cell=1, delta=F(1, 8))
    term = cert.terms[0]
    # the ball around an isolated event is itself at any radius
    assert term.k == 1


def test_horizon_trivial_delta():
    cert = stability_horizon(chain_family(), chain_params(), 0, F(3, 2))
    assert cert.N == 0
    assert cert.terms == ()


def test_horizon_requires_alpha_below_one():
    family = chain_family()
    with pytest.raises(ModelError):
        stability_horizon(family, StreamParams.constant(F(1, 4), F(1)), 0,
                          F(1, 4))


def test_horizon_certificate_arithmetic():
    family = chain_family()
    params = chain_params()
    for delta in (F(1, 4), F(1, 16)):
        cert = stability_horizon(family, params, cell=0, delta=delta)
        assert cert.total_bound(params) <= delta
        assert cert.N == max(t.t for t in cert.terms)


def test_horizon_empirical_soundness():
    """Over 10^4 seeded runs, the frequency of the cell changing after step
    N stays within delta + 3*sigma."""
    family = chain_family()
    params = chain_params()
    active_k = 60
    trials = 10_000
    certs = {delta: stability_horizon(family, params, 0, delta)
             for delta in (F(1, 4), F(1, 16))}
    horizon_cap = max(c.N for c in certs.values())
    last_change: list[int] = []
    for seed in range(trials):
        result = run_stream(family, active_k, Tape(seed=seed), 10_000)
        assert result.status == SATISFIED
        last = 0
        value = result.log.initial[0]
        for step in result.log.steps:
            for v, _, x in step.draws:
                if v == 0 and x != value:
                    value = x
                    last = step.number
        last_change.append(last)
    for delta, cert in certs.items():
        changed = sum(1 for t in last_change if t > cert.N)
        freq = F(changed, trials)
        excess = freq - delta
        assert excess <= 0 or excess * excess * trials <= 9 * freq * (1 - freq)


# --- output distribution intervals --------------------------------------------

def test_interval_zero_event_system():
    system = ConstraintSystem.build([uniform_bit(0)], [])
    lo, hi = approx_output_distribution(system, (0,), F(1, 64))
    assert lo == hi == F(1, 2)


def test_interval_single_event_forces_zero(one_bit_system):
    delta = F(1, 64)
    lo, hi = approx_output_distribution(one_bit_system, (0,), delta)
    assert hi - lo <= delta
    assert lo >= 1 - delta
    lo1, hi1 = approx_output_distribution(one_bit_system, (1,), delta)
    assert hi1 <= delta


def test_interval_prefix_too_long(one_bit_system):
    with pytest.raises(ModelError):
        approx_output_distribution(one_bit_system, (0, 0), F(1, 4))


def test_interval_widths_shrink_with_delta(one_bit_system):
    widths = []
    for delta in (F(1, 4), F(1, 16), F(1, 256)):
        lo, hi = approx_output_distribution(one_bit_system, (0,), delta)
        widths.append(hi - lo)
        assert hi - lo <= delta
    assert widths == sorted(widths, reverse=True) or widths[0] == widths[-1]


def test_interval_contains_refined_value(chain2_system):
    coarse = approx_output_distribution(chain2_system, (0, 0), F(1, 8))
    fine = approx_output_distribution(chain2_system, (0, 0), F(1, 512))
    assert coarse[0] <= fine[0] and fine[1] <= coarse[1]


def test_interval_refuses_past_guard():
    system = ConstraintSystem.build(
        [VariableSpec(0, (F(1, 3), F(2, 3)))],
        [clause_event(0, (0,), (1,))])
    with pytest.raises(BudgetRefused):
        # thirds leave 2^-B undecided mass forever; a tiny delta with a tiny
        # guard must refuse rather than approximate
        approx_output_distribution(system, (0,), F(1, 2 ** 30), bit_guard=16)


# --- extraction ----------------------------------------------------------------

def test_point_mass_extraction():
    q = TableQOracle({"01": F(1)})
    assert list(islice(extract_positive_branch(q), 6)) == [0, 1, 0, 1, 0, 1]


def test_heavy_branch_extraction():
    q = TableQOracle({"1": F(3, 5), "0": F(2, 5)})
    got = list(islice(extract_from_positive_probability(q, F(2, 5)), 5))
    assert got == [1, 1, 1, 1, 1]


def test_contract_violation_small_r():
    q = TableQOracle({"1": F(3, 5), "0": F(2, 5)})
    with pytest.raises(ContractViolation):
        list(islice(extract_from_positive_probability(q, F(1, 10)), 3))


def test_two_winners_violation():
    # both children carry mass > r: the parent must exceed 2r
    q = TableQOracle({"1": F(1, 2), "0": F(1, 2)})
    with pytest.raises(ContractViolation):
        list(islice(extract_from_positive_probability(q, F(1, 3)), 2))


def test_deterministic_machine_extraction():
    q = TableQOracle({"0101": F(1)})
    got = list(islice(extract_from_positive_probability(q, F(3, 5)), 4))
    assert got == [0, 1, 0, 1]


def test_extraction_from_starting_prefix():
    q = TableQOracle({"1": F(3, 5), "0": F(2, 5)})
    got = list(islice(
        extract_from_positive_probability(q, F(2, 5), w=(1, 1)), 3))
    assert got == [1, 1, 1]


def test_positive_branch_two_atoms_prefers_low_value():
    q = TableQOracle({"0": F(1, 2), "1": F(1, 2)})
    assert list(islice(extract_positive_branch(q), 4)) == [0, 0, 0, 0]


def test_positive_branch_unique_support():
    q = TableQOracle({"110": F(1, 3)})
    got = list(islice(extract_positive_branch(q), 6))
    assert got == [1, 1, 0, 1, 1, 0]


def test_extractors_agree_on_point_mass():
    q = TableQOracle({"10": F(1)})
    a = list(islice(extract_positive_branch(q), 6))
    b = list(islice(extract_from_positive_probability(q, F(3, 5)), 6))
    assert a == b


def test_extraction_timeout():
    q = TableQOracle({"0": F(0)})  # no mass anywhere
    with pytest.raises(ExtractionTimeout):
        list(islice(extract_positive_branch(q, max_rounds=8), 1))


def test_positive_branch_records_bounds():
    q = TableQOracle({"0": F(1, 2), "1": F(1, 2)})
    bounds: list = []
    list(islice(extract_positive_branch(q, bounds_out=bounds), 3))
    assert len(bounds) == 3
    assert all(b > 0 for b in bounds)


# --- certified prefixes ---------------------------------------------------------

def test_prefix_zero_length(one_bit_system):
    result = compute_assignment_prefix(one_bit_system, None, 0)
    assert result.values == ()


def test_prefix_single_event_forces_zero(one_bit_system):
    result = compute_assignment_prefix(one_bit_system, None, 1,
                                       mode="exact", delta=F(1, 64))
    assert result.values == (0,)
    assert all(b > 0 for b in result.cell_bounds)
    lo, hi = result.interval
    assert lo > 0 and hi - lo <= F(1, 64)


def test_prefix_zero_event_system_all_zeros():
    system = ConstraintSystem.build([uniform_bit(i) for i in range(3)], [])
    result = compute_assignment_prefix(system, None, 3, mode="exact")
    assert result.values == (0, 0, 0)


def test_prefix_decided_events_false(chain2_system):
    result = compute_assignment_prefix(chain2_system, None, 5, mode="exact")
    for i in range(2):
        assert not chain2_system.is_true(i, result.values)


def test_prefix_extends_to_avoiding_assignment(chain2_system):
    # brute-force cross-validation: the certified prefix is a prefix of at
    # least one assignment avoiding every event
    result = compute_assignment_prefix(chain2_system, None, 4, mode="exact")
    avoiders = avoiding_assignments(chain2_system)
    assert any(a[:4] == result.values for a in avoiders)


def test_prefix_empirical_mode(chain3_system):
    params = StreamParams.constant(F(1, 2), F(1))
    result = compute_assignment_prefix(chain3_system, params, 3,
                                       mode="empirical", trials=300, seed=1)
    assert len(result.values) == 3
    assert len(result.frequencies) == 3
    assert all(0 < f <= 1 for f in result.frequencies)
    assert result.trials == 300


def test_prefix_family_target_requires_k():
    family = chain_family()
    with pytest.raises(ModelError):
        compute_assignment_prefix(family, chain_params(), 2)
    result = compute_assignment_prefix(family, chain_params(), 2,
                                       mode="exact", active_k=1)
    assert len(result.values) == 2


def test_system_oracle_monotone(one_bit_system):
    oracle = SystemQOracle(one_bit_system)
    values = [oracle.lower_bound((0,), n) for n in range(1, 6)]
    assert values == sorted(values)
    assert values[-1] > 0
