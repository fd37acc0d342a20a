"""Lyapunov exponents of the Zorich cocycle and singular-value utilities.

The estimator runs a float orbit of Zorich induction (lengths renormalized to
unit sum every step), pushes an orthonormal frame through each cocycle
matrix and re-orthonormalizes with QR, accumulating ``log |R_ii|``.

Restricted mode tracks a frame of H(pi). Rounding errors leak out of H and
would be amplified relative to the most contracting direction, so the frame
is projected back onto the H of the current vertex after every step.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import mpmath
import numpy as np
from numba import njit

from . import exact
from .errors import GapTooSmall, InvalidInput, ModeMismatch
from .perm import Permutation
from .rauzy import RauzyClass, enumerate_class
from .symplectic import genus, h_basis

MODES = ("restricted", "extended")
N_BATCHES = 100
ESTIMATOR_RUN_CAP = 10**15

# kernel status codes
_OK, _KEANE, _RUNCAP = 0, 1, 2


@dataclass
class LyapunovReport:
    cls: str
    mode: str
    seed: int
    steps: int
    burn_in: int
    theta: list[float]
    stderr: list[float]
    valid: bool = True
    error: str | None = None
    genus: int | None = None

    @property
    def ratios(self) -> list[float]:
        if not self.theta or self.theta[0] <= 0:
            return []
        return [t / self.theta[0] for t in self.theta]

    def joint_stderr(self, i: int, j: int) -> float:
        return math.hypot(self.stderr[i], self.stderr[j])

    def is_simple(self, factor: float = 5.0) -> bool:
        """Every consecutive gap exceeds ``factor`` joint standard errors.

        In restricted mode all exponents are compared; in extended mode only
        the outer ``g`` largest and ``g`` smallest, since the extra zeros
        are not simple.
        """
        th = self.theta
        if self.mode == "restricted":
            pairs = range(len(th) - 1)
        else:
            g = self.genus or 0
            pairs = [i for i in range(len(th) - 1) if i < g - 1 or i >= len(th) - g]
        return all(th[i] - th[i + 1] > factor * self.joint_stderr(i, i + 1) for i in pairs)

    def to_json(self) -> dict:
        out = {
            "class": self.cls,
            "mode": self.mode,
            "seed": self.seed,
            "steps": self.steps,
            "burn_in": self.burn_in,
            "theta": self.theta,
            "stderr": self.stderr,
            "ratios": self.ratios,
            "valid": self.valid,
            "simple": self.valid and self.is_simple(),
            "genus": self.genus,
        }
        if self.mode == "restricted":
            out["symmetric"] = self.valid and spectrum_symmetry_check(self)
        if self.error:
            out["error"] = self.error
        return out


def spectrum_symmetry_check(report: LyapunovReport, factor: float = 4.0) -> bool:
    if report.mode != "restricted":
        raise ModeMismatch("symmetry is only defined for the restricted cocycle")
    th, se = report.theta, report.stderr
    n = len(th)
    return all(abs(th[i] + th[n - 1 - i]) <= factor * (se[i] + se[n - 1 - i]) for i in range(n))


@dataclass
class CocycleAccumulator:
    """Orthonormal frame pushed through cocycle matrices, with log stretches.

    The numba kernel keeps the same state in flat arrays; this class is the
    readable version used by the reference estimator and by callers that
    drive the cocycle themselves.
    """

    frame: np.ndarray
    mode: str = "extended"
    log_sums: np.ndarray = None
    steps: int = 0

    def __post_init__(self):
        self.frame, _ = np.linalg.qr(np.asarray(self.frame, dtype=float))
        if self.log_sums is None:
            self.log_sums = np.zeros(self.frame.shape[1])

    def push(self, matrix, projector: np.ndarray | None = None, record: bool = True) -> None:
        f = np.asarray(matrix, dtype=float) @ self.frame
        if projector is not None:
            f = projector @ f
        self.frame, r = np.linalg.qr(f)
        if record:
            self.log_sums += np.log(np.abs(np.diag(r)))
            self.steps += 1

    def exponents(self) -> list[float]:
        return sorted((self.log_sums / self.steps).tolist(), reverse=True)


# -- class tables for the kernel -----------------------------------------------------


@dataclass
class ClassTables:
    cls: RauzyClass
    top: np.ndarray
    bottom: np.ndarray
    next_top: np.ndarray
    next_bottom: np.ndarray
    projectors: np.ndarray
    genus: int = field(default=0)


def _h_projector(p: Permutation) -> np.ndarray:
    s = h_basis(p)
    b = np.array([[float(v) for v in vec] for vec in s.basis.vectors]).T
    q, _ = np.linalg.qr(b)
    return q @ q.T


def class_tables(cls: RauzyClass, mode: str) -> ClassTables:
    letters = cls.root.alphabet
    idx = letters.index
    d = cls.d
    top = np.array([[idx(x) for x in p.top] for p in cls.vertices], dtype=np.int64)
    bottom = np.array([[idx(x) for x in p.bottom] for p in cls.vertices], dtype=np.int64)
    if mode == "restricted":
        proj = np.stack([_h_projector(p) for p in cls.vertices])
    else:
        proj = np.zeros((0, d, d))
    g = genus(cls.root)
    return ClassTables(
        cls, top, bottom,
        np.array(cls.next_top, dtype=np.int64),
        np.array(cls.next_bottom, dtype=np.int64),
        proj, g,
    )


@njit(cache=True)
def _zorich_kernel(lam, v, frame, top, bottom, next_top, next_bottom, proj,
                   steps, burn_in, n_batches, run_cap):
    d = lam.shape[0]
    k = frame.shape[1]
    sums = np.zeros(k)
    batch = np.zeros((n_batches, k))
    bsize = (steps - burn_in) // n_batches
    counts = np.zeros(d)
    status = 0
    done = 0
    for step in range(steps):
        x = top[v, d - 1]
        y = bottom[v, d - 1]
        if lam[x] == lam[y]:
            status = 1
            break
        is_top = lam[x] > lam[y]
        if is_top:
            w = x
        else:
            w = y
        for i in range(d):
            counts[i] = 0.0
        # letters after the winner in the other row lose in cyclic turn
        total = 0.0
        p = 0
        for i in range(d):
            z = bottom[v, i] if is_top else top[v, i]
            if z == w:
                p = i
        for i in range(p + 1, d):
            z = bottom[v, i] if is_top else top[v, i]
            total += lam[z]
        m = 0.0
        q = math.floor(lam[w] / total) - 1.0
        if q >= 1.0:
            lam[w] -= q * total
            for i in range(p + 1, d):
                z = bottom[v, i] if is_top else top[v, i]
                counts[z] += q
            m += q * (d - 1 - p)
        while True:
            loser = bottom[v, d - 1] if is_top else top[v, d - 1]
            if lam[w] == lam[loser]:
                status = 1
                break
            if lam[w] < lam[loser]:
                break
            lam[w] -= lam[loser]
            counts[loser] += 1.0
            m += 1.0
            v = next_top[v] if is_top else next_bottom[v]
        if status != 0:
            break
        if m > run_cap:
            status = 2
            break
        s = 0.0
        for i in range(d):
            s += lam[i]
        for i in range(d):
            lam[i] /= s
        for z in range(d):
            if counts[z] != 0.0:
                for j in range(k):
                    frame[z, j] += counts[z] * frame[w, j]
        if proj.shape[0] > 0:
            frame = proj[v] @ np.ascontiguousarray(frame)
        qm, r = np.linalg.qr(frame)
        frame = qm
        if step >= burn_in:
            j = step - burn_in
            b = j // bsize
            for i in range(k):
                val = math.log(abs(r[i, i]))
                sums[i] += val
                if b < n_batches:
                    batch[b, i] += val
        done = step + 1
    return sums, batch, status, done, v


def _initial_frame(tables: ClassTables, mode: str, rng: np.random.Generator, v0: int = 0) -> np.ndarray:
    d = tables.cls.d
    if mode == "restricted":
        k = 2 * tables.genus
        raw = tables.projectors[v0] @ rng.standard_normal((d, k))
    else:
        raw = rng.standard_normal((d, d))
    q, _ = np.linalg.qr(raw)
    return np.ascontiguousarray(q)


def _summarize(sums, batch, accumulated: int, n_batches: int):
    theta = sums / accumulated
    bsize = accumulated // n_batches
    means = batch / bsize
    stderr = means.std(axis=0, ddof=1) / math.sqrt(n_batches)
    order = np.argsort(-theta, kind="stable")
    return [float(theta[i]) for i in order], [float(stderr[i]) for i in order]


def estimate_exponents(class_rep: Permutation, mode: str = "restricted", seed: int = 0,
                       steps: int = 10**6, burn_in: int | None = None,
                       n_batches: int = N_BATCHES, run_cap: int = ESTIMATOR_RUN_CAP,
                       tables: ClassTables | None = None) -> LyapunovReport:
    """Estimate the exponents per Zorich step from one seeded orbit.

    ``steps`` counts every Zorich step including the first ``burn_in`` ones,
    which move the frame but are not averaged. The orbit starts at
    ``class_rep`` with lengths uniform on the simplex.
    """
    if mode not in MODES:
        raise InvalidInput(f"mode must be one of {MODES}")
    if burn_in is None:
        burn_in = steps // 100
    if not steps > burn_in >= 0:
        raise InvalidInput("need steps > burn_in >= 0")
    if steps - burn_in < 2 * n_batches:
        raise InvalidInput("too few averaged steps for the batch count")
    if tables is None:
        tables = class_tables(enumerate_class(class_rep), mode)
    rng = np.random.default_rng(seed)
    d = class_rep.d
    e = rng.exponential(1.0, size=d)
    lam = e / e.sum()
    v0 = tables.cls.index[class_rep]
    frame = _initial_frame(tables, mode, rng, v0)
    sums, batch, status, done, _ = _zorich_kernel(
        lam, v0, frame, tables.top, tables.bottom, tables.next_top, tables.next_bottom,
        tables.projectors, steps, burn_in, n_batches, float(run_cap),
    )
    report = LyapunovReport(str(class_rep), mode, seed, steps, burn_in, [], [], genus=tables.genus)
    if status != _OK:
        report.valid = False
        report.error = "KeaneViolation" if status == _KEANE else "RunCapExceeded"
        acc = done - burn_in
        if acc >= 2 * n_batches:
            report.theta, report.stderr = _summarize(sums, batch, acc, n_batches)
        report.steps = done
        return report
    report.theta, report.stderr = _summarize(sums, batch, steps - burn_in, n_batches)
    return report


def _estimate_job(args):
    text, mode, seed, steps, burn_in = args
    return estimate_exponents(Permutation.parse(text), mode, seed, steps, burn_in)


def estimate_many(class_rep: Permutation, seeds: Sequence[int], mode: str = "restricted",
                  steps: int = 10**6, burn_in: int | None = None,
                  workers: int = 1) -> list[LyapunovReport]:
    """One report per seed, sorted by seed whatever the worker count."""
    jobs = [(str(class_rep), mode, s, steps, burn_in) for s in sorted(seeds)]
    if workers <= 1:
        return [_estimate_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_estimate_job, jobs))


def reference_exponents(class_rep: Permutation, mode: str, seed: int, steps: int,
                        burn_in: int = 0) -> list[float]:
    """Slow pure-Python twin of the kernel, for cross-checking short runs.

    Uses the same seed protocol, so the orbit and frame match the kernel.
    """
    from .dynamics import IETState, zorich_step

    tables = class_tables(enumerate_class(class_rep), mode)
    rng = np.random.default_rng(seed)
    d = class_rep.d
    e = rng.exponential(1.0, size=d)
    lam = tuple(float(v) for v in e / e.sum())
    acc = CocycleAccumulator(_initial_frame(tables, mode, rng), mode)
    state = IETState(lam, class_rep)
    for step in range(steps):
        state, rec = zorich_step(state, ESTIMATOR_RUN_CAP)
        state = state.normalized()
        proj = _h_projector(state.perm) if mode == "restricted" else None
        acc.push(np.array(rec.matrix.tolist(), dtype=float), proj, record=step >= burn_in)
    return acc.exponents()


# -- singular values ------------------------------------------------------------------


@dataclass
class SingularSpectrum:
    sigma: list[float]
    k: int | None = None
    e_plus: np.ndarray | None = None
    e_minus: np.ndarray | None = None


def singular_decomp(x, k: int | None = None, rtol: float = 1e-12) -> SingularSpectrum:
    """Singular values of a real matrix and, for a split ``k``, the spaces
    spanned by right singular vectors with the ``k`` largest / the rest."""
    a = np.asarray(x, dtype=float)
    _, s, vt = np.linalg.svd(a)
    out = SingularSpectrum([float(v) for v in s])
    if k is None:
        return out
    if not 1 <= k < len(s):
        raise InvalidInput("split index out of range")
    if s[k - 1] - s[k] <= rtol * s[0]:
        raise GapTooSmall(f"sigma_{k} and sigma_{k + 1} are not separated")
    out.k = k
    out.e_plus = vt[:k].T
    out.e_minus = vt[k:].T
    return out


def _compound(m: list[list[int]], k: int) -> list[list[int]]:
    n = len(m)
    subsets = list(combinations(range(n), k))
    return [[int(exact.det([[m[i][j] for j in cols] for i in rows])) for cols in subsets]
            for rows in subsets]


def _top_singular(m: list[list[int]]) -> mpmath.mpf:
    """Largest singular value of an exact integer matrix, to ~30 digits."""
    k = exact.matmul(exact.transpose(m), m)
    with mpmath.workdps(40):
        ev = mpmath.eigsy(mpmath.matrix(k), eigvals_only=True)
        return mpmath.sqrt(max(ev))


def int_singular_values(m) -> list[mpmath.mpf]:
    """All singular values of an integer matrix with full relative accuracy.

    ``sigma_1 ... sigma_k`` is the top singular value of the k-th compound
    matrix, so each ratio of consecutive compounds gives one ``sigma_k``
    without cancellation, however large the entries.
    """
    rows = [[int(v) for v in r] for r in (m.tolist() if isinstance(m, np.ndarray) else m)]
    n = len(rows)
    out = []
    prev = mpmath.mpf(1)
    with mpmath.workdps(40):
        for k in range(1, n + 1):
            cur = _top_singular(_compound(rows, k)) if k < n else abs(mpmath.mpf(exact.det(rows)))
            out.append(cur / prev)
            prev = cur
    return out


def lyapunov_exponents_of_matrix(x) -> list[float]:
    """``log |eigenvalue|`` with multiplicity, largest first."""
    rows = [[int(v) for v in r] for r in (x.tolist() if isinstance(x, np.ndarray) else x)]
    digits = max((abs(v).bit_length() for r in rows for v in r), default=1) * 0.302
    dps = int(len(rows) * digits) + 40
    with mpmath.workdps(dps):
        ev = mpmath.eig(mpmath.matrix(rows), left=False, right=False)
        logs = [float(mpmath.log(abs(e))) if e != 0 else -math.inf for e in ev]
    return sorted(logs, reverse=True)
