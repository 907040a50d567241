"""Push-sum (ratio) and row-averaging consensus engines over R^d states.

Every per-node reduction runs over the graph's fixed edge list, sorted by
(receiver, sender), via unbuffered scatter-adds. Repeated runs are therefore
bit-identical, and a d-dimensional run matches d independent scalar runs
coordinate for coordinate, exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation
from .graph import StochasticMatrix

__all__ = [
    "RatioState",
    "RowState",
    "ConsensusTrace",
    "make_ratio_state",
    "ratio_step",
    "row_step",
    "run_consensus",
    "consensus_limit",
    "perron_left",
    "scalar_vector_equivalence_check",
    "pairwise_spread",
    "write_state_csv",
    "read_state_csv",
]


@dataclass(frozen=True)
class RatioState:
    """Per-node numerator x (n, d), denominator y (n,), ratio r = x / y."""

    x: np.ndarray
    y: np.ndarray
    r: np.ndarray
    k: int = 0


@dataclass(frozen=True)
class RowState:
    z: np.ndarray
    k: int = 0


def make_ratio_state(x0) -> RatioState:
    x = np.array(x0, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"initial states must be (n, d), got shape {x.shape}")
    y = np.ones(x.shape[0])
    return RatioState(x, y, x / y[:, None], 0)


def _check_column(W: StochasticMatrix):
    if W.kind != "column":
        raise ValueError(f"ratio updates need column-stochastic weights, got kind {W.kind!r}")


def ratio_step(state: RatioState, W: StochasticMatrix) -> RatioState:
    """One synchronous push-sum round.

    Receiver j accumulates w[j, i] * x_i over its senders i in ascending
    order, likewise for y, then r = x / y. Column stochasticity conserves
    the totals of x and y.
    """
    _check_column(W)
    n = W.graph.n
    x, y = state.x, state.y
    if x.ndim != 2 or x.shape[0] != n or y.shape != (n,):
        raise ValueError(f"state shapes {x.shape}, {y.shape} do not match n={n}")
    dst, src = W.graph.edge_arrays
    we = W.edge_weights
    xn = np.zeros_like(x)
    np.add.at(xn, dst, we[:, None] * x[src])
    yn = np.zeros_like(y)
    np.add.at(yn, dst, we * y[src])
    if yn.min() <= 0.0:
        raise InvariantViolation(f"nonpositive denominator at k={state.k + 1}")
    return RatioState(xn, yn, xn / yn[:, None], state.k + 1)


def row_step(state: RowState, A: StochasticMatrix) -> RowState:
    """One synchronous averaging round: z_i <- sum_j a[i, j] z_j over senders."""
    if A.kind != "row":
        raise ValueError(f"row updates need row-stochastic weights, got kind {A.kind!r}")
    n = A.graph.n
    z = state.z
    if z.ndim != 2 or z.shape[0] != n:
        raise ValueError(f"state shape {z.shape} does not match n={n}")
    dst, src = A.graph.edge_arrays
    we = A.edge_weights
    zn = np.zeros_like(z)
    np.add.at(zn, dst, we[:, None] * z[src])
    return RowState(zn, state.k + 1)


@dataclass
class ConsensusTrace:
    """Stacked history of a run. states[k] holds the ratio states r(k) for
    the ratio engine or z(k) for the row engine; xs and ys are None for the
    row engine."""

    engine: str
    states: np.ndarray
    xs: np.ndarray | None = None
    ys: np.ndarray | None = None

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1


def run_consensus(W: StochasticMatrix, x0, steps: int) -> ConsensusTrace:
    """Run the engine matching W.kind for a fixed number of rounds."""
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if W.kind == "column":
        st = make_ratio_state(x0)
        xs, ys, rs = [st.x], [st.y], [st.r]
        for _ in range(steps):
            st = ratio_step(st, W)
            xs.append(st.x)
            ys.append(st.y)
            rs.append(st.r)
        return ConsensusTrace("ratio", np.stack(rs), np.stack(xs), np.stack(ys))
    st = RowState(np.array(x0, dtype=float))
    zs = [st.z]
    for _ in range(steps):
        st = row_step(st, W)
        zs.append(st.z)
    return ConsensusTrace("row", np.stack(zs))


def perron_left(A: np.ndarray, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """Left Perron vector of a row-stochastic matrix, normalized to sum 1.

    Plain power iteration on A^T; primitivity (positive diagonal plus strong
    connectivity) guarantees convergence, so hitting the cap signals a
    weight matrix that violates those assumptions.
    """
    n = A.shape[0]
    v = np.full(n, 1.0 / n)
    At = np.ascontiguousarray(A.T)
    for _ in range(max_iter):
        w = At @ v
        w = w / w.sum()
        if np.abs(w - v).sum() <= tol:
            return w
        v = w
    raise RuntimeError("power iteration did not converge; matrix may not be primitive")


def consensus_limit(initial, W: StochasticMatrix) -> np.ndarray:
    """Analytic limit of the run: the plain average for the ratio engine,
    the Perron-weighted average for the row engine."""
    initial = np.asarray(initial, dtype=float)
    if W.kind == "column":
        return initial.mean(axis=0)
    return perron_left(W.w) @ initial


def scalar_vector_equivalence_check(initial, W: StochasticMatrix, steps: int) -> bool:
    """Re-run each coordinate as an independent scalar consensus and compare
    against the vector run bit for bit."""
    initial = np.asarray(initial, dtype=float)
    trace = run_consensus(W, initial, steps)
    dst, src = W.graph.edge_arrays
    we = W.edge_weights
    n, d = initial.shape
    for c in range(d):
        if W.kind == "column":
            xc = initial[:, c].copy()
            y = np.ones(n)
            for t in range(1, steps + 1):
                xn = np.zeros(n)
                np.add.at(xn, dst, we * xc[src])
                yn = np.zeros(n)
                np.add.at(yn, dst, we * y[src])
                rc = xn / yn
                if not (np.array_equal(xn, trace.xs[t, :, c])
                        and np.array_equal(yn, trace.ys[t])
                        and np.array_equal(rc, trace.states[t, :, c])):
                    return False
                xc, y = xn, yn
        else:
            zc = initial[:, c].copy()
            for t in range(1, steps + 1):
                zn = np.zeros(n)
                np.add.at(zn, dst, we * zc[src])
                if not np.array_equal(zn, trace.states[t, :, c]):
                    return False
                zc = zn
    return True


def pairwise_spread(states, p: float = 2.0) -> float:
    """Largest pairwise p-norm distance among the rows of an (n, d) array."""
    from .geometry import vector_norm

    arr = np.asarray(states, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected (n, d) states, got shape {arr.shape}")
    if arr.shape[0] == 1:
        return 0.0
    diffs = arr[:, None, :] - arr[None, :, :]
    return float(vector_norm(diffs, p, axis=-1).max())


def write_state_csv(trace: ConsensusTrace, path):
    """Rows (k, node, coord, x, y, r) at 17 significant digits, which is
    enough to round-trip float64 exactly. The row engine stores z in both
    x and r with y = 1."""
    states = trace.states
    T, n, d = states.shape
    xs = trace.xs if trace.xs is not None else states
    with open(path, "w", newline="") as fh:
        fh.write("k,node,coord,x,y,r\n")
        for k in range(T):
            for i in range(n):
                y = trace.ys[k, i] if trace.ys is not None else 1.0
                for c in range(d):
                    fh.write(f"{k},{i},{c},{xs[k, i, c]:.17g},{y:.17g},{states[k, i, c]:.17g}\n")


def read_state_csv(path) -> ConsensusTrace:
    """Exact inverse of write_state_csv (engine label is not stored)."""
    ks, nodes, coords, xv, yv, rv = [], [], [], [], [], []
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if header != "k,node,coord,x,y,r":
            raise ValueError(f"unexpected state csv header {header!r}")
        for line in fh:
            k, i, c, x, y, r = line.rstrip("\n").split(",")
            ks.append(int(k))
            nodes.append(int(i))
            coords.append(int(c))
            xv.append(float(x))
            yv.append(float(y))
            rv.append(float(r))
    T = max(ks) + 1
    n = max(nodes) + 1
    d = max(coords) + 1
    xs = np.empty((T, n, d))
    ys = np.empty((T, n))
    rs = np.empty((T, n, d))
    for k, i, c, x, y, r in zip(ks, nodes, coords, xv, yv, rv):
        xs[k, i, c] = x
        ys[k, i] = y
        rs[k, i, c] = r
    return ConsensusTrace("unknown", rs, xs, ys)
