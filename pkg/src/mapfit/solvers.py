"""Solution strategies for the one-hot assignment problem.

Six entry points share the SolveReport result type: a per-block linear
baseline, a convexified quadratic program via spectrum shift, a semidefinite
relaxation solved by operator splitting, a sequential-quadratic local
method, simulated annealing, and exhaustive brute force.  All of them round
to a feasible binary assignment (largest entry per block, lowest index on
ties) and report both the continuous-model value and the recomputed binary
objective x^T Q x - b^T x.
"""

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from mapfit import _backend


class Mode(enum.Enum):
    BINARY = "binary"
    CONTINUOUS = "continuous"


@dataclass(frozen=True)
class AssignmentVector:
    """Length m*N vector over the block structure (m blocks of N).

    Binary mode requires exactly one 1 per block (one-hot); continuous mode
    requires every entry in [0, 1].
    """

    values: np.ndarray
    mode: Mode
    m: int
    N: int

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        n = self.m * self.N
        if values.shape != (n,):
            raise ValueError(
                f"expected length {n} for m={self.m}, N={self.N}, "
                f"got shape {values.shape}"
            )
        if self.mode is Mode.BINARY:
            if not np.all((values == 0.0) | (values == 1.0)):
                raise ValueError("binary assignment entries must be 0 or 1")
            sums = values.reshape(self.m, self.N).sum(axis=1)
            if not np.all(sums == 1.0):
                raise ValueError("each block must contain exactly one 1")
        else:
            if np.any(values < 0.0) or np.any(values > 1.0):
                raise ValueError("continuous entries must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_indices(cls, m, N, indices):
        """Binary vector selecting 0-based position indices[i] in block i."""
        indices = np.asarray(indices, dtype=np.int64)
        if indices.shape != (m,):
            raise ValueError(f"need {m} indices, got shape {indices.shape}")
        if np.any(indices < 0) or np.any(indices >= N):
            raise ValueError(f"indices must lie in [0, {N})")
        values = np.zeros(m * N)
        values[np.arange(m) * N + indices] = 1.0
        return cls(values, Mode.BINARY, m, N)

    def selected_positions(self):
        """0-based chosen position per block (binary mode only)."""
        if self.mode is not Mode.BINARY:
            raise ValueError("selected_positions needs a binary assignment")
        return np.argmax(self.values.reshape(self.m, self.N), axis=1)


@dataclass(frozen=True)
class SAParams:
    """Simulated-annealing schedule; label renders as SA(t0, weight)."""

    t0: float = 100.0
    penalty_weight: float = 1.0
    cooling_factor: float = 0.95
    max_iterations: int = 5000
    seed: int = 0
    raw_step: bool = False

    def __post_init__(self):
        if self.t0 <= 0.0:
            raise ValueError(f"initial temperature must be > 0, got {self.t0}")
        if self.penalty_weight < 0.0:
            raise ValueError(
                f"penalty weight must be >= 0, got {self.penalty_weight}"
            )
        if not 0.0 < self.cooling_factor < 1.0:
            raise ValueError(
                f"cooling factor must be in (0, 1), got {self.cooling_factor}"
            )
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")

    @property
    def label(self):
        return f"SA({self.t0:g},{self.penalty_weight:g})"


CSV_HEADER = "method,continuous_obj,binary_obj,beta,wall_time_s,converged"


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solver run.

    binary_objective always equals objective(problem, assignment) recomputed;
    continuous_objective is the value of the solver's own continuous model
    (shifted / lifted where applicable).
    """

    method: str
    continuous_objective: float
    binary_objective: float
    assignment: AssignmentVector
    iterations: int
    wall_time: float
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def to_kv_text(self):
        lines = [
            f"method={self.method}",
            f"continuous_objective={self.continuous_objective!r}",
            f"binary_objective={self.binary_objective!r}",
            f"iterations={self.iterations}",
            f"wall_time={self.wall_time!r}",
            f"converged={str(self.converged).lower()}",
            "assignment=" + ",".join(
                str(int(v)) for v in self.assignment.values
            ),
        ]
        for key in sorted(self.diagnostics):
            value = self.diagnostics[key]
            text = value if isinstance(value, str) else repr(value)
            lines.append(f"diag.{key}={text}")
        return "\n".join(lines) + "\n"

    def csv_row(self, beta=None, include_wall_time=True):
        """One CSV row: method,continuous_obj,binary_obj,beta,wall_time_s,
        converged.  beta may be omitted (empty field); wall time may be
        excluded for byte-reproducible outputs."""
        beta_text = "" if beta is None else repr(float(beta))
        time_text = repr(self.wall_time) if include_wall_time else ""
        return ",".join([
            self.method,
            repr(self.continuous_objective),
            repr(self.binary_objective),
            beta_text,
            time_text,
            str(self.converged).lower(),
        ])


def objective(problem, x):
    """x^T Q x - b^T x; accepts an AssignmentVector or a raw vector, which
    need not be feasible."""
    values = x.values if isinstance(x, AssignmentVector) else np.asarray(
        x, dtype=np.float64)
    if values.shape != (problem.n,):
        raise ValueError(
            f"expected length {problem.n}, got shape {values.shape}"
        )
    return float(values @ problem.Q @ values - problem.b @ values)


def acceptance_probability(delta, temperature):
    """Uphill acceptance probability 1 / (1 + exp(delta / T)).

    Decreasing in delta, exactly 0.5 at delta = 0.
    """
    if temperature <= 0.0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    z = delta / temperature
    if z > 700.0:
        return 0.0
    if z < -700.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(z))


def _round_blocks(values, m, N):
    """Largest entry per block wins; ties go to the lowest index."""
    indices = np.argmax(values.reshape(m, N), axis=1)
    return AssignmentVector.from_indices(m, N, indices)


def round_assignment(y):
    """Continuous assignment -> feasible binary assignment (per-block
    argmax, lowest-index tie-break)."""
    if isinstance(y, AssignmentVector):
        return _round_blocks(np.asarray(y.values), y.m, y.N)
    raise TypeError(f"expected AssignmentVector, got {type(y).__name__}")


def project_simplex(v):
    """Euclidean projection of a vector onto the standard simplex
    {x >= 0, sum x = 1} (sort-based exact algorithm)."""
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    j = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / j > 0.0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _project_blocks(values, m, N):
    out = values.reshape(m, N).copy()
    for r in range(m):
        out[r] = project_simplex(out[r])
    return out.ravel()


def _timed(start):
    return time.perf_counter() - start


def solve_linear(problem):
    """Drop the quadratic term: maximize b^T y over the feasible set.

    The optimum is attained per block at a vertex, so the binary answer
    selects the largest b entry in each block (lowest index on ties).
    continuous_objective is the linear model value -b^T y*.
    """
    start = time.perf_counter()
    m, N = problem.m, problem.N
    indices = np.argmax(problem.b.reshape(m, N), axis=1)
    assignment = AssignmentVector.from_indices(m, N, indices)
    linear_value = -float(problem.b @ assignment.values)
    return SolveReport(
        method="linear",
        continuous_objective=linear_value,
        binary_objective=objective(problem, assignment),
        assignment=assignment,
        iterations=1,
        wall_time=_timed(start),
        converged=True,
    )


def spectrum_shift(Q):
    """Qhat = Q - lambda_min * I; returns (Qhat, lambda_min).

    Adds the constant -lambda_min * m on the binary feasible set, so the
    binary argmin set is unchanged while the quadratic form becomes PSD.
    """
    Q = np.asarray(Q, dtype=np.float64)
    scale = max(float(np.abs(Q).max()) if Q.size else 0.0, 1.0)
    if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-10 * scale):
        raise ValueError("spectrum shift needs a symmetric matrix")
    eigenvalues = np.linalg.eigvalsh(Q)
    lambda_min = float(eigenvalues[0])
    return Q - lambda_min * np.eye(Q.shape[0]), lambda_min


def solve_shift(problem, max_iterations=20000):
    """Projected gradient descent on the convexified objective
    y^T Qhat y - b^T y over the product of per-block simplices.

    Step 1/L with L = 2 * lambda_max(Qhat), Armijo backtracking; stops when
    the projected-gradient norm falls below 1e-8 * (1 + ||b||).
    """
    start = time.perf_counter()
    m, N, b = problem.m, problem.N, problem.b
    Qhat, lambda_min = spectrum_shift(problem.Q)
    lambda_max = float(np.linalg.eigvalsh(Qhat)[-1])
    diagnostics = {"lambda_min": lambda_min, "lambda_max_shifted": lambda_max}

    if lambda_max <= 1e-14 * max(1.0, abs(lambda_min)):
        # Quadratic term vanished: the problem is the linear one.
        report = solve_linear(problem)
        return SolveReport(
            method="shift",
            continuous_objective=report.continuous_objective,
            binary_objective=report.binary_objective,
            assignment=report.assignment,
            iterations=0,
            wall_time=_timed(start),
            converged=True,
            diagnostics=diagnostics,
        )

    L = 2.0 * lambda_max
    base_step = 1.0 / L
    tol = 1e-8 * (1.0 + float(np.linalg.norm(b)))

    def f(y):
        return float(y @ Qhat @ y - b @ y)

    def gradient(y):
        return 2.0 * (Qhat @ y) - b

    y = np.full(problem.n, 1.0 / N)
    f_y = f(y)
    converged = False
    iterations = 0
    pg_norm = math.inf
    for iterations in range(1, max_iterations + 1):
        g = gradient(y)
        trial = _project_blocks(y - base_step * g, m, N)
        pg_norm = float(np.linalg.norm(y - trial)) / base_step
        if pg_norm <= tol:
            converged = True
            break
        # Armijo backtracking from the nominal step.
        step = base_step
        accepted = False
        for _ in range(40):
            candidate = (trial if step == base_step
                         else _project_blocks(y - step * g, m, N))
            move = candidate - y
            f_new = f(candidate)
            if f_new <= f_y - 1e-4 / step * float(move @ move):
                y, f_y = candidate, f_new
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # No further decrease representable in double precision.
            converged = pg_norm <= tol
            break

    assignment = _round_blocks(y, m, N)
    diagnostics["projected_gradient_norm"] = pg_norm
    return SolveReport(
        method="shift",
        continuous_objective=f_y,
        binary_objective=objective(problem, assignment),
        assignment=assignment,
        iterations=iterations,
        wall_time=_timed(start),
        converged=converged,
        diagnostics=diagnostics,
    )


def _project_affine_lifted(M, m, N):
    """Least-squares projection of a symmetric lifted matrix onto
    {M[0,0] = 1, M[i,i] = M[0,i] = M[i,0], per-block diagonal sums = 1}."""
    n = m * N
    out = 0.5 * (M + M.T)
    d = np.diag(out)[1:]
    s = out[0, 1:]
    c = (d + 2.0 * s) / 3.0
    blocks = c.reshape(m, N)
    blocks = blocks + (1.0 - blocks.sum(axis=1, keepdims=True)) / N
    y = blocks.ravel()
    out[0, 0] = 1.0
    out[0, 1:] = y
    out[1:, 0] = y
    out[np.arange(1, n + 1), np.arange(1, n + 1)] = y
    return out


def _project_psd(M):
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    w = np.maximum(w, 0.0)
    return (V * w) @ V.T


def solve_sdp(problem, max_iterations=20000, size_cap=64):
    """Semidefinite relaxation: lift y to M = [[1, y^T], [y, Y]] >= 0 with
    diag(Y) = y and per-block sums 1, minimize Tr(QY) - b^T y.

    Solved by operator splitting (ADMM) alternating the closed-form affine
    projection with PSD eigenvalue clipping; stops when the combined
    primal/dual residual is <= 1e-6.  The continuous objective is a lower
    bound on the binary optimum (every feasible x gives the feasible lift
    Y = x x^T).
    """
    start = time.perf_counter()
    m, N, n = problem.m, problem.N, problem.n
    if n > size_cap:
        raise ValueError(
            f"problem size n={n} exceeds the dense relaxation cap "
            f"{size_cap}"
        )
    C = np.zeros((n + 1, n + 1))
    C[0, 1:] = -0.5 * problem.b
    C[1:, 0] = -0.5 * problem.b
    C[1:, 1:] = problem.Q

    warm = solve_linear(problem).assignment.values
    Z = np.empty((n + 1, n + 1))
    Z[0, 0] = 1.0
    Z[0, 1:] = warm
    Z[1:, 0] = warm
    Z[1:, 1:] = np.outer(warm, warm)
    U = np.zeros_like(Z)
    rho = 1.0
    tol = 1e-6
    residual = np.inf
    converged = False
    iterations = 0
    M = Z
    for iterations in range(1, max_iterations + 1):
        M = _project_affine_lifted(Z - U - C / rho, m, N)
        Z_new = _project_psd(M + U)
        primal = float(np.linalg.norm(M - Z_new))
        dual = rho * float(np.linalg.norm(Z_new - Z))
        Z = Z_new
        U = U + M - Z
        residual = max(primal, dual)
        if residual <= tol:
            converged = True
            break
        # Rebalance the penalty only every 10 iterations; per-iteration
        # rescaling can limit-cycle.
        if iterations % 10 == 0:
            if primal > 10.0 * dual:
                rho *= 2.0
                U /= 2.0
            elif dual > 10.0 * primal:
                rho /= 2.0
                U *= 2.0

    y = np.clip(M[0, 1:], 0.0, 1.0)
    Y = M[1:, 1:]
    continuous = float(np.trace(problem.Q @ Y) - problem.b @ M[0, 1:])
    assignment = _round_blocks(y, m, N)
    return SolveReport(
        method="sdp",
        continuous_objective=continuous,
        binary_objective=objective(problem, assignment),
        assignment=assignment,
        iterations=iterations,
        wall_time=_timed(start),
        converged=converged,
        diagnostics={
            "residual": residual,
            "rho": rho,
            "lifted_min_eigenvalue": float(np.linalg.eigvalsh(M)[0]),
            "diag_mismatch": float(np.max(np.abs(np.diag(Y) - M[0, 1:]))),
        },
    )


def _psd_clip(H, epsilon):
    w, V = np.linalg.eigh(H)
    w = np.maximum(w, 0.0)
    return (V * w) @ V.T + epsilon * np.eye(H.shape[0])


def solve_sqp(problem, max_iterations=100, inner_iterations=200):
    """Sequential quadratic descent from the linear warm start.

    Each outer iteration minimizes the convex model g^T d + 0.5 d^T H d
    (H = PSD-clipped 2Q plus a tiny ridge) over steps keeping y feasible,
    using a fixed budget of projected-gradient inner iterations, then
    backtracks on the true objective.  Stops when the accepted step norm
    is <= 1e-8.  If the rounded result would be worse than the warm start,
    the warm start is kept (diagnostics flag fallback_used).
    """
    start = time.perf_counter()
    m, N, b = problem.m, problem.N, problem.b
    warm_report = solve_linear(problem)
    warm = warm_report.assignment.values.copy()
    scale = float(np.abs(np.linalg.eigvalsh(problem.Q)).max())
    H = _psd_clip(2.0 * problem.Q, 1e-8 * scale)
    h_max = float(np.linalg.eigvalsh(H)[-1])
    inner_step = 1.0 / h_max if h_max > 0.0 else 1.0

    def f(y):
        return float(y @ problem.Q @ y - b @ y)

    y = warm.copy()
    f_y = f(y)
    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        g = 2.0 * (problem.Q @ y) - b
        # Inner solve: min over feasible z of g . (z - y) + 0.5 (z-y) H (z-y)
        z = y.copy()
        for _ in range(inner_iterations):
            model_gradient = g + H @ (z - y)
            z_new = _project_blocks(z - inner_step * model_gradient, m, N)
            if np.linalg.norm(z_new - z) <= 1e-12:
                z = z_new
                break
            z = z_new
        d = z - y
        d_norm = float(np.linalg.norm(d))
        if d_norm <= 1e-8:
            converged = True
            break
        slope = float(g @ d)
        t = 1.0
        accepted = False
        for _ in range(40):
            f_new = f(y + t * d)
            if f_new <= f_y + 1e-4 * t * min(slope, 0.0):
                y = y + t * d
                f_y = f_new
                accepted = True
                break
            t *= 0.5
        if not accepted:
            converged = True
            break
        if t * d_norm <= 1e-8:
            converged = True
            break

    assignment = _round_blocks(y, m, N)
    binary = objective(problem, assignment)
    diagnostics = {"fallback_used": 0.0, "warm_start": "linear"}
    if binary > warm_report.binary_objective:
        # The descent is on the continuous surrogate; keep the better of
        # the rounded result and the warm-start incumbent.
        assignment = warm_report.assignment
        binary = warm_report.binary_objective
        diagnostics["fallback_used"] = 1.0
    return SolveReport(
        method="sqp",
        continuous_objective=f_y,
        binary_objective=binary,
        assignment=assignment,
        iterations=iterations,
        wall_time=_timed(start),
        converged=converged,
        diagnostics=diagnostics,
    )


def solve_sa(problem, params=None):
    """Simulated annealing on the penalized objective
    y^T Q y - b^T y + w * ||Ay - 1||_1 over the unit box.

    Proposals move along a uniformly random direction with effective step
    min(T_k, 1) (raw_step uses T_k unclamped); uphill moves are accepted
    with probability 1/(1 + exp(delta/T_k)); T cools by the cooling factor
    every iteration.  Starts from the linear warm start, tracks the
    best-seen iterate, and is bitwise deterministic for a fixed seed.  If
    the rounded best iterate would be worse than the warm start, the warm
    start is kept (diagnostics flag fallback_used).
    """
    start = time.perf_counter()
    if params is None:
        params = SAParams()
    m, N, n = problem.m, problem.N, problem.n
    warm_report = solve_linear(problem)
    y0 = warm_report.assignment.values
    rng = np.random.default_rng(params.seed)
    normals = rng.standard_normal((params.max_iterations, n))
    uniforms = rng.uniform(size=params.max_iterations)
    best_y, best_f, accepted = _backend.sa_minimize(
        np.ascontiguousarray(problem.Q), np.ascontiguousarray(problem.b),
        m, N, np.ascontiguousarray(y0), params.t0, params.cooling_factor,
        params.penalty_weight, params.max_iterations,
        np.ascontiguousarray(normals), np.ascontiguousarray(uniforms),
        params.raw_step,
    )
    assignment = _round_blocks(np.asarray(best_y), m, N)
    binary = objective(problem, assignment)
    diagnostics = {"accepted": float(accepted), "fallback_used": 0.0,
                   "warm_start": "linear"}
    if binary > warm_report.binary_objective:
        assignment = warm_report.assignment
        binary = warm_report.binary_objective
        diagnostics["fallback_used"] = 1.0
    return SolveReport(
        method=params.label,
        continuous_objective=float(best_f),
        binary_objective=binary,
        assignment=assignment,
        iterations=params.max_iterations,
        wall_time=_timed(start),
        converged=True,
        diagnostics=diagnostics,
    )


def solve_bruteforce(problem, cap=10 ** 6):
    """Exact minimizer by enumerating all N^m feasible assignments in
    lexicographic (k_1, ..., k_m) order; first-found minimum wins ties."""
    start = time.perf_counter()
    m, N = problem.m, problem.N
    total = N ** m
    if total > cap:
        raise ValueError(
            f"brute force would enumerate {total} assignments, cap is {cap}"
        )
    indices, best = _backend.brute_force_min(
        np.ascontiguousarray(problem.Q), np.ascontiguousarray(problem.b),
        m, N,
    )
    assignment = AssignmentVector.from_indices(m, N, np.asarray(indices))
    return SolveReport(
        method="brute",
        continuous_objective=float(best),
        binary_objective=objective(problem, assignment),
        assignment=assignment,
        iterations=total,
        wall_time=_timed(start),
        converged=True,
        diagnostics={"states": float(total)},
    )


def enumerate_objectives(problem, cap=10 ** 6):
    """All N^m binary objectives in lexicographic (k_1, ..., k_m) order,
    as (indices array of shape (N^m, m), objective array).  Test oracle."""
    m, N = problem.m, problem.N
    total = N ** m
    if total > cap:
        raise ValueError(
            f"enumeration would produce {total} assignments, cap is {cap}"
        )
    grids = np.meshgrid(*[np.arange(N)] * m, indexing="ij")
    indices = np.stack([g.ravel() for g in grids], axis=1)
    flat = indices + np.arange(m) * N
    objectives = np.empty(total)
    for row in range(total):
        cols = flat[row]
        objectives[row] = (problem.Q[np.ix_(cols, cols)].sum()
                           - problem.b[cols].sum())
    return indices, objectives


METHODS = ("linear", "shift", "sdp", "sqp", "sa", "brute")


def solve(problem, method, sa_params=None, **kwargs):
    """Dispatch on the method name: linear|shift|sdp|sqp|sa|brute."""
    if method == "linear":
        return solve_linear(problem)
    if method == "shift":
        return solve_shift(problem, **kwargs)
    if method == "sdp":
        return solve_sdp(problem, **kwargs)
    if method == "sqp":
        return solve_sqp(problem, **kwargs)
    if method == "sa":
        return solve_sa(problem, sa_params)
    if method == "brute":
        return solve_bruteforce(problem, **kwargs)
    raise ValueError(
        f"unknown method {method!r}; expected one of {'|'.join(METHODS)}"
    )
