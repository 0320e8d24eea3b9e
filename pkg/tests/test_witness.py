from __future__ import annotations

from fractions import Fraction

import pytest

from lll_toolkit.errors import ModelError
from lll_toolkit.model import ConstraintSystem, clause_event, uniform_bit
from lll_toolkit.tape import Tape
from lll_toolkit.engine import (SATISFIED, log_from_event_sequence,
                                run_finite)
from lll_toolkit.witness import (WitnessTree, build_witness_tree,
                                 crosscheck_tape_positions,
                                 reconstruct_tape_positions,
                                 tape_positions_by_vertex,
                                 tree_probability_bound, trees_for_run,
                                 validate_tree)

from conftest import make_chain_cnf

F = Fraction


def test_worked_example_reverse_scan(paper_example_system):
    log = log_from_event_sequence(paper_example_system, [2, 1, 3, 4, 2])
    tree = build_witness_tree(log, 5, paper_example_system)
    assert tree.root_label == 2
    assert tree.depths() == (0, 1, 1, 2)
    # 4 skipped (no neighbors in the tree); 3 then 1 become sons of the
    # root; the final 2 goes under the deepest candidate, label 1 by the
    # lowest-label tie-break
    assert tree.labels == (2, 3, 1, 2)
    assert tree.parents == (-1, 0, 0, 2)
    assert tree.labels[tree.parents[3]] == 1
    assert 4 not in tree.labels
    assert tree.canonical_line() == "2(1(2),3)"


def test_single_step_tree_is_singleton(paper_example_system):
    log = log_from_event_sequence(paper_example_system, [2, 1, 3, 4, 2])
    tree = build_witness_tree(log, 1, paper_example_system)
    assert tree.labels == (2,)
    assert tree.size == 1


def test_non_neighbor_prefix_skipped(paper_example_system):
    log = log_from_event_sequence(paper_example_system, [1, 4])
    tree = build_witness_tree(log, 2, paper_example_system)
    assert tree.labels == (4,)


def test_bad_step_index(paper_example_system):
    log = log_from_event_sequence(paper_example_system, [2])
    with pytest.raises(ModelError):
        build_witness_tree(log, 2, paper_example_system)
    with pytest.raises(ModelError):
        build_witness_tree(log, 0, paper_example_system)


def test_canonical_equality_ignores_child_order():
    a = WitnessTree((2, 3, 1), (-1, 0, 0))
    b = WitnessTree((2, 1, 3), (-1, 0, 0))
    assert a == b
    assert hash(a) == hash(b)
    assert a.canonical_line() == b.canonical_line()


def test_tree_structural_validation():
    with pytest.raises(ModelError):
        WitnessTree((), ())
    with pytest.raises(ModelError):
        WitnessTree((1, 2), (0, -1))
    with pytest.raises(ModelError):
        WitnessTree((1, 2), (-1, 5))


# --- validate_tree ----------------------------------------------------------

def test_constructed_trees_always_validate(paper_example_system):
    log = log_from_event_sequence(paper_example_system, [2, 1, 3, 4, 2, 1, 3])
    for k in range(1, 8):
        tree = build_witness_tree(log, k, paper_example_system)
        assert validate_tree(tree, paper_example_system).valid


def test_same_depth_neighbors_rejected(paper_example_system):
    # 1 and 2 are neighbors but sit at the same depth under root 3
    bad = WitnessTree((3, 2, 1), (-1, 0, 0))
    check = validate_tree(bad, paper_example_system)
    assert not check.valid
    assert any("depth" in v for v in check.violations)


def test_non_neighbor_son_rejected(paper_example_system):
    bad = WitnessTree((4, 1), (-1, 0))
    check = validate_tree(bad, paper_example_system)
    assert not check.valid


def test_singleton_always_valid(paper_example_system):
    assert validate_tree(WitnessTree((3,), (-1,)),
                         paper_example_system).valid


# --- trees_for_run ----------------------------------------------------------

def test_one_tree_per_step_all_distinct(chain3_system):
    for seed in (1, 6, 11, 16, 17, 29):
        result = run_finite(chain3_system, Tape(seed=seed), 100)
        trees = trees_for_run(result.log, chain3_system)
        assert len(trees) == result.resample_count
        assert len({t.canon() for t in trees}) == len(trees)


def test_repeated_isolated_event_grows_chains(one_bit_system):
    result = run_finite(one_bit_system, Tape(bits="110"), 10)
    trees = trees_for_run(result.log, one_bit_system)
    assert [t.size for t in trees] == [1, 2]


def test_empty_log_gives_no_trees(one_bit_system):
    result = run_finite(one_bit_system, Tape(bits="0"), 10)
    assert trees_for_run(result.log, one_bit_system) == []


def test_root_label_multiplicity_increases(paper_example_system):
    log = log_from_event_sequence(paper_example_system, [2, 3, 2, 1, 2])
    trees = trees_for_run(log, paper_example_system)
    counts = [t.label_counts()[2] for t in trees if t.root_label == 2]
    assert counts == sorted(counts)
    assert len(set(counts)) == len(counts)


def test_variable_label_once_per_level(chain3_system, paper_example_system):
    for system, seeds in ((chain3_system, range(20)),):
        for seed in seeds:
            result = run_finite(system, Tape(seed=seed), 100)
            for tree in trees_for_run(result.log, system):
                depths = tree.depths()
                seen = set()
                for v in range(tree.size):
                    for var in system.events[tree.labels[v]].vbl:
                        key = (depths[v], var)
                        assert key not in seen
                        seen.add(key)


# --- tape position reconstruction -------------------------------------------

def test_singleton_positions(paper_example_system):
    tree = WitnessTree((1,), (-1,))
    assert reconstruct_tape_positions(tree, paper_example_system) == {1: [1]}


def test_worked_example_positions(paper_example_system):
    log = log_from_event_sequence(paper_example_system, [2, 1, 3, 4, 2])
    tree = build_witness_tree(log, 5, paper_example_system)
    positions = reconstruct_tape_positions(tree, paper_example_system)
    # variable 1 (shared by events 1 and 2) appears at depths 2, 1, 0:
    # consecutive positions in level order
    assert positions[1] == [1, 2, 3]
    assert positions[2] == [1, 2, 3]
    assert crosscheck_tape_positions(tree, log, paper_example_system)


def test_disjoint_labels_at_one_level(paper_example_system):
    tree = WitnessTree((2, 1, 3), (-1, 0, 0))
    by_vertex = tape_positions_by_vertex(tree, paper_example_system)
    # sons touch disjoint variables, each consuming that variable's first
    # resample entry
    assert by_vertex[1] == {1: 1}
    assert by_vertex[2] == {2: 1}


def test_logged_runs_crosscheck_everywhere(chain3_system):
    checked = 0
    for seed in range(60):
        result = run_finite(chain3_system, Tape(seed=seed), 200)
        assert result.status == SATISFIED
        log = result.log
        for k in range(1, len(log.steps) + 1):
            tree = build_witness_tree(log, k, chain3_system)
            assert crosscheck_tape_positions(tree, log, chain3_system)
            checked += 1
    assert checked > 20


def test_crosscheck_on_bigger_chain():
    system = make_chain_cnf(3, 8, seed=13)
    checked = 0
    for seed in range(40):
        result = run_finite(system, Tape(seed=seed), 400)
        assert result.status == SATISFIED
        for k in range(1, result.resample_count + 1):
            tree = build_witness_tree(result.log, k, system)
            assert crosscheck_tape_positions(tree, result.log, system)
            checked += 1
    assert checked > 40


# --- probability bound -----------------------------------------------------

def test_bound_single_label_m3_clause():
    system = ConstraintSystem.build(
        [uniform_bit(i) for i in range(3)],
        [clause_event(0, (0, 1, 2), (1, 1, 1))])
    tree = WitnessTree((0,), (-1,))
    assert tree_probability_bound(tree, system) == F(1, 8)


def test_bound_two_labels_multiplied():
    system = ConstraintSystem.build(
        [uniform_bit(i) for i in range(3)],
        [clause_event(0, (0, 1, 2), (1, 1, 1))])
    tree = WitnessTree((0, 0), (-1, 0))
    assert tree_probability_bound(tree, system) == F(1, 64)


def test_bound_zero_probability_label(paper_example_system):
    tree = WitnessTree((0,), (-1,))
    assert tree_probability_bound(tree, paper_example_system) == 0


# --- statistical appearance bound -------------------------------------------

def test_appearance_frequency_within_three_sigma():
    """Appearance frequency of the 20 most frequent trees stays within a
    3-sigma band of the label-product bound over 10^4 seeded runs."""
    system = make_chain_cnf(3, 4, seed=21)
    trials = 10_000
    counts: dict = {}
    trees: dict = {}
    for seed in range(trials):
        result = run_finite(system, Tape(seed=seed), 300)
        assert result.status == SATISFIED
        for tree in trees_for_run(result.log, system):
            c = tree.canon()
            counts[c] = counts.get(c, 0) + 1
            trees.setdefault(c, tree)
    top = sorted(counts, key=counts.get, reverse=True)[:20]
    for canon in top:
        n = counts[canon]
        bound = tree_probability_bound(trees[canon], system)
        freq = F(n, trials)
        # exact comparison: freq <= bound + 3*sqrt(freq(1-freq)/trials)
        slack = freq - bound
        if slack <= 0:
            continue
        assert slack * slack * trials <= 9 * freq * (1 - freq)
