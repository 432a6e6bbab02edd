"""Running the anchored proximal iteration and measuring what the bound
calculus predicts about it.

z_(n+1) = lambda_n u + gamma_n z_n + delta_n J_(c_n)(z_n) + e_n

The trace keeps every iterate together with the per-step parameters so the
empirical searches (metastability witnesses, stabilization indices) and the
diagnostic inequalities can be evaluated after the fact without re-running
the operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .countfn import Budget, BudgetExceededError, CountFn, evaluate
from .operators import ResolventOperator, as_point

# Floating-point slack for the diagnostic inequalities; the recurrence is
# exact algebra over the iterates, so only rounding noise accumulates.
DIAG_TOL = 1e-9


@dataclass
class Trace:
    """Full record of one run over n = 0..horizon."""

    op: ResolventOperator
    z: np.ndarray        # (horizon+1, dim)
    jn: np.ndarray       # J_(c_n)(z_n), same shape
    jfix: np.ndarray     # J_(1/c)(z_n) for the fixed parameter, same shape
    lam: np.ndarray      # (horizon+1,)
    gam: np.ndarray
    delta: np.ndarray
    cs: np.ndarray
    errs: np.ndarray     # (horizon, dim), e_n consumed by step n
    u: np.ndarray
    s: Optional[np.ndarray]
    target: Optional[np.ndarray]
    c_denom: int         # fixed resolvent parameter is 1/c_denom

    @property
    def horizon(self) -> int:
        return self.z.shape[0] - 1

    @property
    def dz(self) -> np.ndarray:
        """Step sizes |z_(n+1) - z_n| for n = 0..horizon-1."""
        return np.linalg.norm(np.diff(self.z, axis=0), axis=1)

    @property
    def w(self) -> np.ndarray:
        """Averaged companions w_n = (z_(n+1) - gamma_n z_n)/(1 - gamma_n),
        defined for n = 0..horizon-1."""
        g = self.gam[:-1, None]
        return (self.z[1:] - g * self.z[:-1]) / (1.0 - g)

    @property
    def gap(self) -> np.ndarray:
        """|w_n - z_n| for n = 0..horizon-1."""
        return np.linalg.norm(self.w - self.z[:-1], axis=1)

    @property
    def res_jn(self) -> np.ndarray:
        """Running residuals |J_(c_n)(z_n) - z_n|."""
        return np.linalg.norm(self.jn - self.z, axis=1)

    @property
    def res_j(self) -> np.ndarray:
        """Fixed residuals |J_(1/c)(z_n) - z_n|."""
        return np.linalg.norm(self.jfix - self.z, axis=1)

    @property
    def dist_s(self) -> Optional[np.ndarray]:
        if self.s is None:
            return None
        return np.linalg.norm(self.z - self.s, axis=1)

    @property
    def dist_target(self) -> Optional[np.ndarray]:
        if self.target is None:
            return None
        return np.linalg.norm(self.z - self.target, axis=1)


def step(op: ResolventOperator, schedule, u: np.ndarray, z: np.ndarray,
         n: int) -> tuple:
    """One update; returns (z_next, J_(c_n)(z))."""
    lam, gam, delta, c, e = schedule.at(n)
    jz = op.resolvent(c, z)
    return lam * u + gam * z + delta * jz + e, jz


def run(op: ResolventOperator, schedule, u, z0, horizon: int, *,
        c: int = 1, s=None, target=None) -> Trace:
    """Run the iteration for `horizon` steps, recording iterates 0..horizon.

    `c` is the integer reciprocal floor of the parameter sequence; the fixed
    residual column uses the resolvent at 1/c.  `s` defaults to the
    operator's zero-set witness and is only used for distance reporting.
    """
    if horizon < 0:
        raise ValueError("horizon must be a natural number")
    if c < 1:
        raise ValueError("c must be a positive integer")
    u = as_point(u)
    z0 = as_point(z0)
    if u.shape[0] != op.dim or z0.shape[0] != op.dim:
        raise ValueError("u and z0 must match the operator dimension")
    s_pt = op.zero_set_witness if s is None else as_point(s)
    t_pt = None if target is None else as_point(target)

    lam, gam, delta, cs, errs = schedule.snapshot(horizon)
    zs = np.empty((horizon + 1, op.dim))
    jn = np.empty_like(zs)
    jfix = np.empty_like(zs)
    zs[0] = z0
    fixed = 1.0 / c
    for n in range(horizon + 1):
        if n < horizon and (delta[n] <= 0 or cs[n] <= 0):
            raise ValueError(f"invalid schedule at n={n}")
        jn[n] = op.resolvent(cs[n], zs[n])
        jfix[n] = op.resolvent(fixed, zs[n])
        if n < horizon:
            zs[n + 1] = lam[n] * u + gam[n] * zs[n] + delta[n] * jn[n] + errs[n]
    return Trace(op=op, z=zs, jn=jn, jfix=jfix, lam=lam, gam=gam, delta=delta,
                 cs=cs, errs=errs, u=u, s=s_pt, target=t_pt, c_denom=c)


# --- empirical searches -------------------------------------------------------


def _window_diameter(z: np.ndarray, lo: int, hi: int, tau: float) -> bool:
    """Is the diameter of z[lo..hi] at most tau?

    Radius from z[lo] decides most cases: diameter lies between the radius
    and twice the radius, so only the borderline band needs exact pairwise
    distances.
    """
    seg = z[lo:hi + 1]
    radius = float(np.max(np.linalg.norm(seg - z[lo], axis=1)))
    if radius > tau:
        return False
    if 2.0 * radius <= tau:
        return True
    diam = 0.0
    for i in range(seg.shape[0]):
        d = float(np.max(np.linalg.norm(seg[i:] - seg[i], axis=1)))
        diam = max(diam, d)
        if diam > tau:
            return False
    return diam <= tau


def empirical_metastability(z: np.ndarray, k: int, f: CountFn,
                            budget: Optional[Budget] = None) -> Optional[int]:
    """Least n whose window [n, n + f(n)] fits inside the recorded horizon
    and has diameter at most 1/(k+1); None when no such n exists."""
    if z.ndim != 2:
        raise ValueError("expected an iterate array of shape (count, dim)")
    tau = 1.0 / (k + 1)
    last = z.shape[0] - 1
    for n in range(last + 1):
        fv = evaluate(f, n, budget)
        if not fv.is_exact:
            raise BudgetExceededError(fv.stage)
        if n + fv.value > last:
            continue
        if _window_diameter(z, n, n + fv.value, tau):
            return n
    return None


def empirical_window_index(values: np.ndarray, k: int, f: CountFn,
                           budget: Optional[Budget] = None) -> Optional[int]:
    """Scalar-sequence form of empirical_metastability: least n whose window
    [n, n + f(n)] fits inside the array and stays at or below 1/(k+1)."""
    if values.ndim != 1:
        raise ValueError("expected a scalar sequence")
    tau = 1.0 / (k + 1)
    last = values.shape[0] - 1
    for n in range(last + 1):
        fv = evaluate(f, n, budget)
        if not fv.is_exact:
            raise BudgetExceededError(fv.stage)
        if n + fv.value > last:
            continue
        if float(np.max(values[n:n + fv.value + 1])) <= tau:
            return n
    return None


def stabilization_index(values: np.ndarray, k: int) -> Optional[int]:
    """Least n with values[m] <= 1/(k+1) for every m >= n within the array;
    None when even the final entry is above threshold."""
    tau = 1.0 / (k + 1)
    sufmax = np.maximum.accumulate(values[::-1])[::-1]
    idx = np.nonzero(sufmax <= tau)[0]
    if idx.size == 0:
        return None
    return int(idx[0])


def asymptotic_residuals(trace: Trace) -> dict:
    """The three residual curves the regularity rates speak about."""
    return {
        "dz": trace.dz,
        "res_Jn": trace.res_jn,
        "res_J": trace.res_j,
    }


# --- diagnostic inequalities ---------------------------------------------------


def recurrence_check(trace: Trace, p, m1: int) -> float:
    """Largest violation of the one-step descent recurrence against the
    reference point p:

        s_(m+1) <= (1 - lambda_m)(s_m + v_m) + lambda_m r_m + eps_m

    with s_m = |z_m - p|^2, v_m = |J_m(p) - p| (|J_m(p) - p| + 2 |z_m - p|),
    r_m = 2 <u - p, z_(m+1) - p> and eps_m = |e_m| (M1 + 2 lambda_m |u - p|).
    Nonpositive up to rounding when p lies in the zero set.
    """
    p = as_point(p)
    h = trace.horizon
    worst = -np.inf
    for m in range(h):
        jp = trace.op.resolvent(trace.cs[m], p)
        dzp = float(np.linalg.norm(trace.z[m] - p))
        s_m = dzp * dzp
        s_m1 = float(np.linalg.norm(trace.z[m + 1] - p) ** 2)
        jgap = float(np.linalg.norm(jp - p))
        v_m = jgap * (jgap + 2.0 * dzp)
        r_m = 2.0 * float(np.dot(trace.u - p, trace.z[m + 1] - p))
        en = float(np.linalg.norm(trace.errs[m]))
        eps = en * (m1 + 2.0 * trace.lam[m] * float(np.linalg.norm(trace.u - p)))
        rhs = (1.0 - trace.lam[m]) * (s_m + v_m) + trace.lam[m] * r_m + eps
        worst = max(worst, s_m1 - rhs)
    return float(worst)


def resolvent_drift_check(trace: Trace, c: int, n0: int) -> float:
    """Largest violation of

        |J_(m+1)(z_(m+1)) - J_m(z_m)| <= |z_(m+1) - z_m| + 2 c N0 |c_(m+1) - c_m|

    which is what makes the running residual inherit the step-size rate."""
    h = trace.horizon
    lhs = np.linalg.norm(np.diff(trace.jn, axis=0), axis=1)
    dz = trace.dz
    cdiff = np.abs(np.diff(trace.cs))
    worst = -np.inf
    for m in range(h):
        worst = max(worst, float(lhs[m] - dz[m] - 2.0 * c * n0 * cdiff[m]))
    return float(worst)


def boundedness_check(trace: Trace, n0: int) -> float:
    """Largest excess of |z_n - s| over N0; requires a reference point s."""
    d = trace.dist_s
    if d is None:
        raise ValueError("trace has no reference point s")
    return float(np.max(d) - n0)


def wbound_check(trace: Trace, a: int, n0: int) -> float:
    """Largest excess of |w_n - s| over 2 a N0."""
    if trace.s is None:
        raise ValueError("trace has no reference point s")
    d = np.linalg.norm(trace.w - trace.s, axis=1)
    return float(np.max(d) - 2.0 * a * n0)


def gap_decrease_check(trace: Trace, nu_values: dict) -> list:
    """Check that past index nu(k) the companion gap is almost decreasing:

        |w_(n+1) - z_(n+1)| <= |w_n - z_n| + 1/(k+1)  for nu(k) <= n <= H-2.

    `nu_values` maps k to the evaluated index.  Returns located violations.
    """
    g = trace.gap
    problems = []
    for k, start in sorted(nu_values.items()):
        tau = 1.0 / (k + 1)
        for n in range(start, trace.horizon - 1):
            if g[n + 1] > g[n] + tau + DIAG_TOL:
                problems.append(
                    f"gap rose by more than 1/{k + 1} at n={n} "
                    f"(nu({k})={start})")
                break
    return problems


# --- trace serialization --------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trace_csv_lines(trace: Trace) -> list:
    """Rows n,znorm_dist_s,dz,res_Jn,res_J,dist_target with full precision;
    dz is empty on the final row, distance columns empty when undefined."""
    dist_s = trace.dist_s
    dist_t = trace.dist_target
    dz = trace.dz
    res_n = trace.res_jn
    res_f = trace.res_j
    lines = ["n,znorm_dist_s,dz,res_Jn,res_J,dist_target"]
    for n in range(trace.horizon + 1):
        cols = [
            str(n),
            _fmt(dist_s[n]) if dist_s is not None else "",
            _fmt(dz[n]) if n < trace.horizon else "",
            _fmt(res_n[n]),
            _fmt(res_f[n]),
            _fmt(dist_t[n]) if dist_t is not None else "",
        ]
        lines.append(",".join(cols))
    return lines
