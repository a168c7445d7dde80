"""Minimizers for binary quadratic models.

``exhaustive_solve`` enumerates every assignment and is the ground truth for
small models. ``simulated_anneal`` runs independent Metropolis restarts and
returns them ranked by energy; the lowest-energy read is the selection.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from ._random import GAMMA, MASK64, MIX1, MIX2
from .qubo import Bqm, energy

MAX_EXHAUSTIVE_VARIABLES = 24

# relative slack for float ties during enumeration; candidates inside it are
# re-scored exactly before the tie rule is applied
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Sample:
    x: np.ndarray
    energy: float

    @property
    def bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.x)

    @property
    def selected(self) -> list[int]:
        return np.flatnonzero(self.x).tolist()


@dataclass(frozen=True)
class SampleSet:
    samples: list[Sample]
    n_reads: int
    seed: int

    @property
    def first(self) -> Sample:
        return self.samples[0]

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.samples])

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_reads": self.n_reads,
            "samples": [{"x": s.bitstring, "energy": s.energy} for s in self.samples],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SampleSet":
        samples = [
            Sample(np.array([c == "1" for c in s["x"]], dtype=np.int8), float(s["energy"]))
            for s in d["samples"]
        ]
        return cls(samples, int(d["n_reads"]), int(d["seed"]))

    @classmethod
    def from_json(cls, text: str) -> "SampleSet":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class AnnealSchedule:
    """Metropolis sweep count, geometric inverse-temperature ramp, restarts."""

    sweeps: int = 1000
    beta_start: float = 0.1
    beta_end: float = 10.0
    n_reads: int = 100

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.n_reads < 1:
            raise ValueError("n_reads must be >= 1")
        if not (0 < self.beta_start <= self.beta_end):
            raise ValueError("need 0 < beta_start <= beta_end")

    def betas(self) -> np.ndarray:
        if self.sweeps == 1:
            return np.array([self.beta_end])
        return np.geomspace(self.beta_start, self.beta_end, self.sweeps)


def _lex_key(x: np.ndarray) -> tuple:
    return tuple(int(b) for b in x)


def _pick(bqm: Bqm, candidates: np.ndarray) -> Sample:
    """Exact-energy minimum over candidate rows; ties go to the lexicographically smallest."""
    scored = [(energy(bqm, x), _lex_key(x), x) for x in candidates]
    e, _, x = min(scored, key=lambda t: (t[0], t[1]))
    return Sample(np.asarray(x, dtype=np.int8), e)


def _bit_rows(k: np.ndarray, n_bits: int) -> np.ndarray:
    # row for integer k is its binary expansion, first column most significant
    return ((k[:, None] >> np.arange(n_bits - 1, -1, -1)) & 1).astype(np.float64)


def exhaustive_solve(bqm: Bqm) -> Sample:
    """Global minimum by enumerating all ``2**n`` assignments.

    Among equal energies the lexicographically smallest bit vector wins, with
    ``x[0]`` the most significant bit.
    """
    n = bqm.n
    if n > MAX_EXHAUSTIVE_VARIABLES:
        raise ValueError(
            f"exhaustive_solve is capped at {MAX_EXHAUSTIVE_VARIABLES} variables, got {n}"
        )
    if n == 0:
        return Sample(np.zeros(0, dtype=np.int8), bqm.offset)

    h, J = bqm.h, bqm.J
    # split into a leading block enumerated in the outer loop and a trailing
    # block evaluated for all its states at once
    n_lo = min(n, 12)
    n_hi = n - n_lo
    lo = slice(n_hi, n)
    hi = slice(0, n_hi)
    XL = _bit_rows(np.arange(1 << n_lo, dtype=np.int64), n_lo)
    JL = np.triu(J[lo, lo], k=1)
    e_lo = XL @ h[lo] + np.einsum("ij,jk,ik->i", XL, JL, XL)
    C = J[hi, lo]
    JH = np.triu(J[hi, hi], k=1)

    best = math.inf
    chunks = []
    chunk = 1 << max(0, min(n_hi, 20 - n_lo))
    for start in range(0, 1 << n_hi, chunk):
        k = np.arange(start, min(start + chunk, 1 << n_hi), dtype=np.int64)
        if n_hi:
            XH = _bit_rows(k, n_hi)
            e_hi = XH @ h[hi] + np.einsum("ij,jk,ik->i", XH, JH, XH)
            E = e_hi[:, None] + e_lo[None, :] + (XH @ C) @ XL.T
        else:
            E = e_lo[None, :]
        m = float(E.min())
        tol = _TIE_RTOL * max(1.0, abs(m))
        if m <= best + tol:
            if m < best - tol:
                chunks = []
            best = min(best, m)
            rows, cols = np.nonzero(E <= best + tol)
            chunks.append((k[rows] if n_hi else np.zeros(rows.size, dtype=np.int64), cols))

    cands = []
    for hi_idx, lo_idx in chunks:
        for a, b in zip(hi_idx, lo_idx):
            x = np.empty(n, dtype=np.int8)
            if n_hi:
                x[:n_hi] = (int(a) >> np.arange(n_hi - 1, -1, -1)) & 1
            x[n_hi:] = XL[b]
            cands.append(x)
    return _pick(bqm, np.array(cands))


@nb.njit(cache=True)
def _splitmix_next(state):
    state = state + np.uint64(GAMMA)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    z = z ^ (z >> np.uint64(31))
    return state, z


@nb.njit(cache=True)
def _anneal_reads(h, J, betas, n_reads, seed):
    n = h.shape[0]
    out = np.zeros((n_reads, n), dtype=np.int8)
    for r in range(n_reads):
        state = seed + np.uint64(r)
        x = np.zeros(n, dtype=np.int8)
        for i in range(n):
            state, z = _splitmix_next(state)
            x[i] = np.int8(z >> np.uint64(63))
        # local field: h_i + sum_j J_ij x_j
        field = h.copy()
        for i in range(n):
            if x[i]:
                for j in range(n):
                    field[j] += J[i, j]
        for s in range(betas.shape[0]):
            beta = betas[s]
            for i in range(n):
                delta = field[i] if x[i] == 0 else -field[i]
                accept = delta <= 0.0
                if not accept:
                    state, z = _splitmix_next(state)
                    u = np.float64(z >> np.uint64(11)) * (1.0 / 9007199254740992.0)
                    accept = u < math.exp(-beta * delta)
                if accept:
                    sign = 1.0 if x[i] == 0 else -1.0
                    x[i] = 1 - x[i]
                    for j in range(n):
                        field[j] += sign * J[i, j]
        out[r] = x
    return out


def simulated_anneal(bqm: Bqm, schedule: AnnealSchedule | None = None, seed: int = 0) -> SampleSet:
    """Independent single-bit Metropolis restarts, ranked by energy.

    Read ``r`` draws from the splitmix64 stream seeded with ``seed + r``:
    first one fair bit per variable for the random start, then one uniform
    per uphill proposal. Each sweep visits variables in index order.
    """
    schedule = schedule or AnnealSchedule()
    if bqm.n < 1:
        raise ValueError("simulated_anneal needs at least one variable")
    seed = int(seed)
    X = _anneal_reads(
        np.ascontiguousarray(bqm.h),
        np.ascontiguousarray(bqm.J),
        schedule.betas(),
        schedule.n_reads,
        np.uint64(seed & MASK64),
    )
    samples = [Sample(x, energy(bqm, x)) for x in X]
    samples.sort(key=lambda s: (s.energy, _lex_key(s.x)))
    return SampleSet(samples, schedule.n_reads, seed)


def select_features(
    bqm: Bqm,
    sampler: str = "annealing",
    schedule: AnnealSchedule | None = None,
    seed: int = 0,
) -> list[int]:
    """Indices switched on in the lowest-energy sample.

    An empty best sample falls back to the single most negative bias
    (lowest index on ties) so downstream models always get a feature.
    """
    if sampler == "exhaustive":
        best = exhaustive_solve(bqm)
    elif sampler == "annealing":
        best = simulated_anneal(bqm, schedule, seed).first
    else:
        raise ValueError(f"unknown sampler {sampler!r}; expected 'exhaustive' or 'annealing'")
    chosen = best.selected
    if not chosen:
        chosen = [int(np.argmin(bqm.h))]
    return chosen
