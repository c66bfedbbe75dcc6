"""Deterministic simulated cluster.

The canonical mode is a single-threaded event loop: at each tick a
seeded weighted draw picks which worker steps next, and communication
(leader selection + pulls) triggers whenever n*l*tau divides the sum
of all per-worker iteration counters.  An optional parallel mode runs
each worker's slice of a communication block on its own thread; by
construction it reproduces the canonical schedule.
"""

from concurrent.futures import ThreadPoolExecutor
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DivergenceError
from .linalg import as_vector
from .objectives import NoiseModel, stochastic_gradient, stochastic_value
from .rng import Rng
from .select import LeaderBoard, select_hierarchy
from .steps import StepParams, downpour_exchange, eagd_center_step, \
    eagd_worker_step, lsgd_step, pull_only_step, sgd_step

METHODS = ("lsgd", "lgd", "easgd", "eagd", "downpour", "sgd")
DIVERGENCE_NORM = 1e12
SCHEDULE_K0 = 100.0


@dataclass
class ClusterConfig:
    n: int
    l: int
    method: str
    step: StepParams
    tau: int = 1
    tau_g: Optional[int] = None
    noise: NoiseModel = field(default_factory=NoiseModel)
    selection: str = "exact"
    selection_window: int = 1
    leader_first_step_only: bool = False
    eta_schedule: str = "constant"
    lambda_schedule: str = "constant"
    speeds: Optional[list] = None
    seed: int = 0
    max_total_steps: int = 1000
    global_from_locals: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.n < 1 or self.l < 1:
            raise ValueError("need n >= 1 groups and l >= 1 workers per group")
        if self.tau_g is None:
            self.tau_g = self.tau
        if not 1 <= self.tau <= self.tau_g:
            raise ValueError(f"need tau_g >= tau >= 1, got tau={self.tau}, tau_g={self.tau_g}")
        if self.selection not in ("exact", "stochastic"):
            raise ValueError(f"unknown selection mode {self.selection!r}")
        if self.speeds is not None:
            self.speeds = [float(s) for s in self.speeds]
            if len(self.speeds) != self.n * self.l:
                raise ValueError("speeds must have one entry per worker")
            if any(s <= 0 for s in self.speeds):
                raise ValueError("speeds must be strictly positive")

    @property
    def n_workers(self):
        return self.n * self.l

    def scheduled_eta(self, k):
        eta = self.step.eta
        if self.eta_schedule == "theta_one_over_k":
            return eta / (1.0 + k / SCHEDULE_K0)
        return eta

    def scheduled_lambda(self, lam, k):
        if self.lambda_schedule == "theta_one_over_k":
            return lam / (1.0 + k / SCHEDULE_K0)
        return lam


@dataclass
class TraceEvent:
    event_index: int
    kind: str  # grad_step | local_pull | global_pull | leader_switch | center_update
    worker: Optional[tuple]  # (group, worker) or None
    total_steps: int
    f_value: Optional[float]
    leader_id: Optional[tuple]  # (group, worker) or None


@dataclass
class ClusterState:
    params: list
    counters: list
    board: Optional[LeaderBoard]
    center: Optional[np.ndarray] = None
    accum: Optional[list] = None

    @property
    def total_steps(self):
        return sum(self.counters)


def center_variable(state):
    """Reporting center: the maintained EASGD center when present,
    otherwise the plain mean of all worker parameters."""
    if state.center is not None:
        return state.center.copy()
    return sum(state.params) / len(state.params)


def _group_of(idx, l):
    return (idx // l, idx % l)


class _Trace:
    def __init__(self):
        self.events = []

    def emit(self, kind, worker, total, f_value, leader):
        self.events.append(
            TraceEvent(len(self.events), kind, worker, total, f_value, leader)
        )


def _check_finite(x, worker, trace):
    if not np.all(np.isfinite(x)) or float(np.max(np.abs(x))) > DIVERGENCE_NORM:
        raise DivergenceError(
            f"worker {worker} diverged at event {len(trace.events)}",
            worker=worker,
            event_index=len(trace.events),
        )


def run(config, obj, init, parallel=False):
    """Execute the asynchronous protocol; returns (ClusterState, trace events).

    Gradient steps between communication events are plain (stochastic)
    gradient steps; pulls happen at the divisibility triggers.  With
    `leader_first_step_only`, the pull terms are instead fused into the
    single gradient step each worker takes right after a leader update.
    """
    nl = config.n_workers
    if len(init) != nl:
        raise ValueError(f"need {nl} initial points, got {len(init)}")
    if parallel:
        return _run_parallel(config, obj, init)

    root = Rng(config.seed)
    sched_rng = root.child(0)
    sel_rng = root.child(1)
    worker_rngs = [root.child(2 + i) for i in range(nl)]
    value_rngs = [root.child(2 + nl + i) for i in range(nl)]
    speeds = config.speeds or [1.0] * nl
    noisy = obj.with_noise(config.noise)

    params = [as_vector(x).copy() for x in init]
    counters = [0] * nl
    accum = [np.zeros(obj.dim) for _ in range(nl)] if config.method == "downpour" else None
    center = center_variable(ClusterState(params, counters, None)) \
        if config.method in ("easgd", "eagd", "downpour") else None
    windows = [deque(maxlen=config.selection_window) for _ in range(nl)]
    trace = _Trace()

    def selection_values():
        if config.selection == "stochastic" and config.selection_window > 1:
            return [
                (sum(w) / len(w)) if w else stochastic_value(noisy, params[i], sel_rng)
                for i, w in enumerate(windows)
            ]
        return None  # fall through to the selector's own sampling

    def select(total):
        return select_hierarchy(
            noisy, params, config.n, config.l,
            mode=config.selection, rng=sel_rng,
            window_values=selection_values(), selected_at=total,
            global_from_locals=config.global_from_locals,
        )

    board = select(0) if config.method in ("lsgd", "lgd") else None
    leader_tuple = _group_of(board.global_leader_id, config.l) if board else None
    pending_local = [False] * nl
    pending_global = [False] * nl

    total = 0
    while total < config.max_total_steps:
        w = sched_rng.choice_weighted(nl, speeds)
        k = counters[w]
        eta_k = config.scheduled_eta(k)
        g = stochastic_gradient(noisy, params[w], worker_rngs[w])

        if config.method in ("lsgd", "lgd", "sgd") and config.leader_first_step_only \
                and (pending_local[w] or pending_global[w]):
            j = w // config.l
            lam_k = config.scheduled_lambda(config.step.lam, k) if pending_local[w] else 0.0
            lamg_k = config.scheduled_lambda(config.step.lam_g, k) if pending_global[w] else 0.0
            fused = StepParams(eta=eta_k, lam=lam_k, lam_g=lamg_k)
            params[w] = lsgd_step(
                params[w], g,
                board.local_leader_params[j], board.global_leader_params, fused,
            )
            pending_local[w] = pending_global[w] = False
        else:
            params[w] = sgd_step(params[w], g, eta_k)
            if config.method == "downpour":
                accum[w] = accum[w] + g

        counters[w] += 1
        total += 1
        _check_finite(params[w], w, trace)
        trace.emit("grad_step", _group_of(w, config.l), total, obj.value(params[w]),
                   leader_tuple)
        if config.selection == "stochastic" and config.selection_window > 1:
            windows[w].append(stochastic_value(noisy, params[w], value_rngs[w]))

        if config.method in ("lsgd", "lgd"):
            if total % (nl * config.tau) == 0:
                new_board = select(total)
                board.local_leader_ids = new_board.local_leader_ids
                board.local_leader_params = new_board.local_leader_params
                board.selected_at = total
                for i in range(nl):
                    j = i // config.l
                    if config.leader_first_step_only:
                        pending_local[i] = True
                    else:
                        lam_k = config.scheduled_lambda(config.step.lam, counters[i])
                        params[i] = pull_only_step(params[i], board.local_leader_params[j], lam_k)
                        trace.emit("local_pull", _group_of(i, config.l), total, None,
                                   _group_of(board.local_leader_ids[j], config.l))
            if total % (nl * config.tau_g) == 0:
                new_board = select(total)
                if new_board.global_leader_id != board.global_leader_id:
                    trace.emit("leader_switch", None, total, None,
                               _group_of(new_board.global_leader_id, config.l))
                board.global_leader_id = new_board.global_leader_id
                board.global_leader_params = new_board.global_leader_params
                leader_tuple = _group_of(board.global_leader_id, config.l)
                for i in range(nl):
                    if config.leader_first_step_only:
                        pending_global[i] = True
                    else:
                        lamg_k = config.scheduled_lambda(config.step.lam_g, counters[i])
                        params[i] = pull_only_step(params[i], board.global_leader_params, lamg_k)
                        trace.emit("global_pull", _group_of(i, config.l), total, None,
                                   leader_tuple)
        elif config.method in ("easgd", "eagd"):
            if total % (nl * config.tau) == 0:
                lam = config.step.elastic_lambda(nl)
                coeff = config.step.eta * lam
                old = [p.copy() for p in params]
                for i in range(nl):
                    params[i] = pull_only_step(params[i], center, coeff)
                center = eagd_center_step(center, old, config.step, lam=lam)
                trace.emit("center_update", None, total, obj.value(center), None)
        elif config.method == "downpour":
            if counters[w] % config.tau == 0:
                center, params[w] = downpour_exchange(accum[w], center, config.step.eta)
                accum[w] = np.zeros(obj.dim)
                trace.emit("center_update", _group_of(w, config.l), total,
                           obj.value(center), None)

    state = ClusterState(params, counters, board, center=center, accum=accum)
    return state, trace.events


def _run_parallel(config, obj, init):
    """Threaded variant: identical schedule, worker slices of each
    communication block execute concurrently.  Only makes sense for
    methods whose workers are independent between pulls."""
    if config.method not in ("lsgd", "lgd", "sgd"):
        raise ValueError("parallel mode supports lsgd/lgd/sgd only")
    if config.leader_first_step_only:
        raise ValueError("parallel mode does not support fused pulls")

    nl = config.n_workers
    root = Rng(config.seed)
    sched_rng = root.child(0)
    sel_rng = root.child(1)
    worker_rngs = [root.child(2 + i) for i in range(nl)]
    speeds = config.speeds or [1.0] * nl
    noisy = obj.with_noise(config.noise)

    params = [as_vector(x).copy() for x in init]
    counters = [0] * nl
    trace = _Trace()

    def select(total):
        return select_hierarchy(
            noisy, params, config.n, config.l, mode=config.selection,
            rng=sel_rng, selected_at=total,
            global_from_locals=config.global_from_locals,
        )

    board = select(0) if config.method in ("lsgd", "lgd") else None
    block = nl * config.tau

    def run_slice(w, n_steps):
        x = params[w]
        for _ in range(n_steps):
            k = counters[w]
            g = stochastic_gradient(noisy, x, worker_rngs[w])
            x = sgd_step(x, g, config.scheduled_eta(k))
            counters[w] += 1
        params[w] = x
        _check_finite(x, w, trace)

    total = 0
    with ThreadPoolExecutor(max_workers=nl) as pool:
        while total < config.max_total_steps:
            n_block = min(block, config.max_total_steps - total)
            picks = [sched_rng.choice_weighted(nl, speeds) for _ in range(n_block)]
            slice_sizes = [picks.count(w) for w in range(nl)]
            list(pool.map(run_slice, range(nl), slice_sizes))
            total += n_block
            for w in range(nl):
                trace.emit("grad_step", _group_of(w, config.l), total,
                           obj.value(params[w]), None)
            if config.method in ("lsgd", "lgd") and total % (nl * config.tau) == 0:
                new_board = select(total)
                board.local_leader_ids = new_board.local_leader_ids
                board.local_leader_params = new_board.local_leader_params
                for i in range(nl):
                    j = i // config.l
                    lam_k = config.scheduled_lambda(config.step.lam, counters[i])
                    params[i] = pull_only_step(params[i], board.local_leader_params[j], lam_k)
                if total % (nl * config.tau_g) == 0:
                    new_board = select(total)
                    board.global_leader_id = new_board.global_leader_id
                    board.global_leader_params = new_board.global_leader_params
                    for i in range(nl):
                        lamg_k = config.scheduled_lambda(config.step.lam_g, counters[i])
                        params[i] = pull_only_step(params[i], board.global_leader_params, lamg_k)

    state = ClusterState(params, counters, board)
    return state, trace.events


class SyncResult:
    """Outcome of a lockstep run: final state plus per-round history."""

    def __init__(self, state, best_values, best_ids, rounds, converged,
                 positions=None, leader_switches=0, leader_grad_norms=None):
        self.state = state
        self.best_values = np.asarray(best_values)
        self.best_ids = best_ids
        self.rounds = rounds
        self.converged = converged
        self.positions = positions
        self.leader_switches = leader_switches
        self.leader_grad_norms = leader_grad_norms or []


def run_synchronous(config, obj, init, max_rounds, tol=None, record_positions=False,
                    pull_times_eta=True):
    """Lockstep rounds of the batch methods (full gradients, uniform
    speeds).  Every worker takes one step per round.

    By default the per-round pull magnitude follows the batch-experiment
    parameterization: both the leader method and elastic averaging move
    workers by eta*lambda*(x - target) per round, so the two methods
    are directly comparable from identical starting points.  With
    ``pull_times_eta=False`` the leader pull is lambda*(x - leader)
    itself (the update-rule convention); elastic averaging is
    unaffected, since its beta coefficient already converts to a
    per-step eta*lambda.
    """
    if not config.noise.exact:
        raise ValueError("synchronous runner requires a noise-free objective")
    method = {"lsgd": "lgd", "easgd": "eagd"}.get(config.method, config.method)
    if method not in ("lgd", "eagd", "sgd"):
        raise ValueError(f"synchronous runner does not support {config.method!r}")

    nl = config.n_workers
    params = [as_vector(x).copy() for x in init]
    eta = config.step.eta
    lam = config.step.elastic_lambda(nl) if method == "eagd" else config.step.lam
    coeff = eta * lam if (pull_times_eta or method == "eagd") else lam
    pull_params = StepParams(eta=eta, lam=coeff if coeff > 0 else 0.0)

    center = sum(params) / nl if method == "eagd" else None
    best_values = []
    best_ids = []
    positions = [] if record_positions else None
    leader = None
    leader_id = -1
    switches = 0
    converged = False
    leader_grad_norms = []

    vals_grads = obj.value_and_grad_many(params)
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        values = [vg[0] for vg in vals_grads]

        if method == "lgd" and (rounds - 1) % config.tau == 0:
            new_id = int(np.argmin(values))
            if new_id != leader_id and leader_id >= 0:
                switches += 1
            leader_id = new_id
            leader = params[leader_id].copy()
            leader_grad_norms.append(float(np.linalg.norm(vals_grads[leader_id][1])))

        max_move = 0.0
        if method == "lgd":
            for i in range(nl):
                new = lsgd_step(params[i], vals_grads[i][1], leader, leader, pull_params)
                max_move = max(max_move, float(np.max(np.abs(new - params[i]))))
                params[i] = new
        elif method == "eagd":
            old = params
            params = [
                eagd_worker_step(old[i], vals_grads[i][1], center, config.step, lam=lam)
                for i in range(nl)
            ]
            max_move = max(
                float(np.max(np.abs(params[i] - old[i]))) for i in range(nl)
            )
            center = eagd_center_step(center, old, config.step, lam=lam)
        else:  # sgd
            for i in range(nl):
                new = sgd_step(params[i], vals_grads[i][1], eta)
                max_move = max(max_move, float(np.max(np.abs(new - params[i]))))
                params[i] = new

        if not np.isfinite(max_move) or max_move > DIVERGENCE_NORM:
            raise DivergenceError(f"synchronous run diverged at round {rounds}")

        vals_grads = obj.value_and_grad_many(params)
        new_values = [vg[0] for vg in vals_grads]
        best_ids.append(int(np.argmin(new_values)))
        best_values.append(min(new_values))
        if record_positions:
            positions.append([p.copy() for p in params])

        if tol is not None and max_move < tol:
            converged = True
            break

    state = ClusterState(params, [rounds] * nl, None, center=center)
    return SyncResult(state, best_values, best_ids, rounds, converged,
                      positions=positions, leader_switches=switches,
                      leader_grad_norms=leader_grad_norms)


def run_synchronous_lgd(config, obj, init, max_rounds=None, tol=None):
    """Lockstep deterministic leader gradient descent; returns
    (ClusterState, trace) with one grad_step event per worker per
    round and leader_switch events at re-selections."""
    max_rounds = max_rounds if max_rounds is not None else config.max_total_steps
    result = run_synchronous(config, obj, init, max_rounds, tol=tol,
                             record_positions=False)
    trace = _Trace()
    prev = None
    for r, (bid, bval) in enumerate(zip(result.best_ids, result.best_values), start=1):
        leader = _group_of(bid, config.l)
        if prev is not None and bid != prev:
            trace.emit("leader_switch", None, r * config.n_workers, None, leader)
        prev = bid
        trace.emit("grad_step", leader, r * config.n_workers, bval, leader)
    result.state.counters = [result.rounds] * config.n_workers
    return result.state, trace.events


CSV_HEADER = "event_index,kind,group,worker,total_steps,f_value,leader_group,leader_worker"


def format_float(v):
    """17 significant digits: enough to round-trip any float64."""
    return "%.17g" % v


def trace_to_csv(events, path_or_file):
    """Write the documented trace schema; floats are byte-stable."""
    own = isinstance(path_or_file, (str, bytes))
    fh = open(path_or_file, "w") if own else path_or_file
    try:
        fh.write(CSV_HEADER + "\n")
        for e in events:
            group, worker = ("", "") if e.worker is None else e.worker
            lgroup, lworker = ("", "") if e.leader_id is None else e.leader_id
            fval = "" if e.f_value is None else format_float(e.f_value)
            fh.write(f"{e.event_index},{e.kind},{group},{worker},"
                     f"{e.total_steps},{fval},{lgroup},{lworker}\n")
    finally:
        if own:
            fh.close()
