"""Witness trees from a resample log, step by step.

Four events with neighbor pairs (1,2) and (2,3); event 4 is isolated and an
extra impossible event 0 keeps the labels aligned with that numbering. For
the resample order 2,1,3,4,2 the tree of the final step has root 2, sons
{1,3}, and the earlier 2 hanging under 1 -- the isolated 4 is skipped.
"""
from lll_toolkit import (ConstraintSystem, Event, build_witness_tree,
                         clause_event, log_from_event_sequence, neighbors,
                         reconstruct_tape_positions, tree_probability_bound,
                         trees_for_run, uniform_bit, validate_tree)

variables = [uniform_bit(i) for i in range(5)]
events = [Event(0, (0,), frozenset()),
          clause_event(1, (1,), (1,)),
          Event(2, (1, 2), frozenset({(1, 1)})),
          clause_event(3, (2,), (1,)),
          clause_event(4, (3,), (1,))]
system = ConstraintSystem.build(variables, events)

print("neighborhoods:")
for i in range(1, 5):
    print(f"  N({i}) = {neighbors(system, i)}")

log = log_from_event_sequence(system, [2, 1, 3, 4, 2])
print("\nresample order: 2, 1, 3, 4, 2")
for k, tree in enumerate(trees_for_run(log, system), start=1):
    print(f"\ntree of step {k}:  {tree.canonical_line()}")
    print("  " + tree.to_indented().replace("\n", "\n  "))
    assert validate_tree(tree, system).valid

final = build_witness_tree(log, 5, system)
print("\nfinal tree consumes these table entries per variable "
      "(deepest level first):")
for var, positions in sorted(reconstruct_tape_positions(final,
                                                        system).items()):
    print(f"  x{var}: entries {positions}")
print(f"appearance probability bound: product of label probabilities = "
      f"{tree_probability_bound(final, system)}")
