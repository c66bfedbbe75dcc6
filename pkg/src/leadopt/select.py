"""Leader selection: exact argmin, one-sample stochastic argmin, and
the local/global hierarchy over a grouped cluster."""

import math

import numpy as np

from .errors import NonFiniteValue
from .objectives import stochastic_value


class LeaderBoard:
    """Snapshot of the current local and global leaders.

    Parameter snapshots are deep copies: worker movement after
    selection never mutates a board entry.
    """

    def __init__(self, local_leader_ids, global_leader_id,
                 local_leader_params, global_leader_params, selected_at=0):
        self.local_leader_ids = list(local_leader_ids)
        self.global_leader_id = global_leader_id
        self.local_leader_params = [np.array(p) for p in local_leader_params]
        self.global_leader_params = np.array(global_leader_params)
        self.selected_at = selected_at


def select_exact(values):
    """Index of the minimum value; ties broken by lowest index."""
    if len(values) == 0:
        raise ValueError("cannot select a leader from an empty list")
    best, best_i = math.inf, -1
    for i, v in enumerate(values):
        if math.isnan(v):
            raise NonFiniteValue(f"NaN objective value for worker {i}", index=i)
        if v < best:
            best, best_i = v, i
    return best_i


def select_stochastic(obj, workers, rng):
    """Draw one value sample per worker, return the argmin.

    With sigma_f = 0 this reduces to exact selection on true values.
    """
    samples = [stochastic_value(obj, w, rng) for w in workers]
    return select_exact(samples)


def _group_values(obj, workers, mode, rng, window_values=None):
    """One estimated value per worker, honoring the selection mode.

    `window_values` optionally carries trailing-window means already
    accumulated by the simulator (the training-loss proxy); when
    present those are used instead of fresh samples.
    """
    if window_values is not None:
        return list(window_values)
    if mode == "exact":
        return [obj.value(w) for w in workers]
    if mode == "stochastic":
        return [stochastic_value(obj, w, rng) for w in workers]
    raise ValueError(f"unknown selection mode {mode!r}")


def select_hierarchy(obj, params, n, l, mode="exact", rng=None, window_values=None,
                     selected_at=0, global_from_locals=False):
    """Local leader per group, global leader over all workers.

    `params` is the flat list of n*l worker vectors, ordered group by
    group.  With `global_from_locals` the global argmin runs over the
    local leaders only (the prose variant); the default follows the
    algorithmic variant, an argmin over all workers.  Under exact
    selection both coincide.
    """
    values = _group_values(obj, params, mode, rng, window_values)
    local_ids = []
    for j in range(n):
        local_ids.append(j * l + select_exact(values[j * l:(j + 1) * l]))
    if global_from_locals:
        gl = local_ids[select_exact([values[i] for i in local_ids])]
    else:
        gl = select_exact(values)
    return LeaderBoard(
        local_leader_ids=local_ids,
        global_leader_id=gl,
        local_leader_params=[params[i] for i in local_ids],
        global_leader_params=params[gl],
        selected_at=selected_at,
    )
