#!/usr/bin/env python3
"""Which framework wins where: preference trees over data characteristics.

One observation is the preference ranking of the frameworks on a single
(task, fold), compared pairwise.  A Bradley-Terry model turns those
comparisons into worth parameters (they sum to 1 in a leaf and read as
the probability of performing best).  A permutation instability test
decides whether worths shift along a meta-feature; if they do, the node
splits at the cutpoint that maximizes the children's model fit.

This demo plants a regime flip at n_instances = 8237 and watches the
tree rediscover it:

    python demos/04_preference_tree.py
"""

import numpy as np

from tabbench.bt import (
    PreferenceObservation,
    fit_bt_mle,
    grow_bt_tree,
    pair_counts,
)

frameworks = ("fast-and-loose", "scales-well", "baseline")
rng = np.random.default_rng(0)

# 60 synthetic tasks x 1 fold: below the cutoff the first framework wins,
# above it the second does; the third trails everywhere.
observations = []
for i in range(120):
    n_instances = float(rng.integers(200, 20_000))
    ranking = (0, 1, 2) if n_instances <= 8237 else (1, 0, 2)
    observations.append(
        PreferenceObservation(
            task_id=f"task{i}", fold=0, ranking=ranking,
            meta={"n_instances": n_instances,
                  "n_features": float(rng.integers(3, 300))},
        )
    )

# A single BT fit summarizes global preference ...
worth = fit_bt_mle(pair_counts(observations, frameworks))
print("global worths:", {f: round(w, 3) for f, w in worth.as_dict().items()})

# ... but the tree reveals the regime structure the global fit averages away.
tree = grow_bt_tree(
    observations, ["n_instances", "n_features"], frameworks,
    alpha=0.05, max_depth=3, seed=1,
)
print()


def show(node, indent="  "):
    from tabbench.bt import BtLeaf

    if isinstance(node, BtLeaf):
        worths = ", ".join(f"{f}={w:.2f}" for f, w in sorted(node.worth.as_dict().items()))
        print(f"{indent}leaf (n={node.n}): {worths}")
    else:
        print(f"{indent}split on {node.feature} at {node.cutpoint:.1f} "
              f"(p = {node.p_value:.4f})")
        show(node.left, indent + "  ")
        show(node.right, indent + "  ")


show(tree.root)
print("\nDOT export for graphviz:")
print(tree.to_dot())
