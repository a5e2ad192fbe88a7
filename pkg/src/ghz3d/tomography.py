"""Tri-qutrit density-matrix tools: the (3,3,3) entanglement-dimension
witness, its projective measurement decomposition, simulated counting and
Monte-Carlo error bars.

Party order is (B, C, D); a product ket |i j k> maps to index 9i + 3j + k
of a 27-component vector.  Logical levels 0, 1, 2 per party are tied to
physical OAM values by a :class:`PartyBasis`.

Every off-diagonal element needed by the witness is reconstructed from 64
projective settings: each party is measured in one of the four two-level
superposition projectors

    P+  = |a+b><a+b|/2,  P-  = |a-b><a-b|/2,
    P+i = |a+ib><a+ib|/2, P-i = |a-ib><a-ib|/2,

on its (a, b) element pair, and the signed/weighted sum of the 4^3 joint
expectations equals the complex matrix element exactly.  27 computational
projections supply the diagonal, 27 + 3 * 64 = 219 settings in total.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

DIM = 3
N_PARTIES = 3
HILBERT = DIM**N_PARTIES

#: descriptor label for an auxiliary never-populated mode, used when an
#: element pair coincides (a projector on (k, q) then measures |k><k|/2)
AUX_LABEL = "q"


class NotDensityMatrix(ValueError):
    """Matrix fails hermiticity, trace or positivity checks."""


def check_density_matrix(rho: np.ndarray, eig_tol: float = 1e-8) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (HILBERT, HILBERT):
        raise NotDensityMatrix(f"expected {HILBERT}x{HILBERT}, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=1e-10):
        raise NotDensityMatrix("not Hermitian within 1e-10")
    if abs(np.trace(rho).real - 1.0) > 1e-10 or abs(np.trace(rho).imag) > 1e-10:
        raise NotDensityMatrix("trace differs from 1 by more than 1e-10")
    smallest = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
    if smallest < -eig_tol:
        raise NotDensityMatrix(f"negative eigenvalue {smallest}")
    return rho


@dataclass(frozen=True)
class PartyBasis:
    """Physical OAM values of logical levels 0, 1, 2 for parties B, C, D."""

    b: tuple[int, int, int] = (2, 3, -1)
    c: tuple[int, int, int] = (0, 1, -1)
    d: tuple[int, int, int] = (0, 1, -1)

    def __post_init__(self) -> None:
        for labels in (self.b, self.c, self.d):
            if len(set(labels)) != 3:
                raise ValueError("party labels must be distinct")

    @property
    def parties(self) -> tuple[tuple[int, int, int], ...]:
        return (self.b, self.c, self.d)


@dataclass(frozen=True)
class NoiseParams:
    """Quality parameters of the produced state.

    ``p``: fraction of diagonal counts inside the expected GHZ terms;
    ``c``: average off-diagonal coherence; ``weights``: GHZ term weights.
    """

    p: float
    c: float
    weights: tuple[float, float, float]

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.c <= 1.0):
            raise ValueError("p and c must lie in [0, 1]")
        if all(w == 0 for w in self.weights):
            raise ValueError("weights must not all vanish")

    @classmethod
    def table1(cls) -> "NoiseParams":
        """Estimated experimental values: p, c and the GHZ term weights."""
        return cls(p=0.878, c=0.817, weights=(0.685, 0.588, 0.491))


def ideal_ghz(weights: Sequence[float] = (1.0, 1.0, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    """Weighted GHZ state: normalized vector and its density matrix."""
    w = np.asarray(weights, dtype=complex)
    if w.shape != (3,) or not np.any(w):
        raise ValueError("need three weights, not all zero")
    vec = np.zeros(HILBERT, dtype=complex)
    for t in range(3):
        vec[t * 9 + t * 3 + t] = w[t]
    vec = vec / np.linalg.norm(vec)
    return vec, np.outer(vec, vec.conj())


def fidelity(rho: np.ndarray, psi: np.ndarray) -> float:
    """Tr(rho |psi><psi|) for a pure target."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    return float(np.real(psi.conj() @ rho @ psi))


def schmidt_coeffs(psi: np.ndarray, party: int) -> np.ndarray:
    """Descending Schmidt coefficients of one party against the other two."""
    t = np.asarray(psi, dtype=complex).reshape(3, 3, 3)
    mat = np.moveaxis(t, party, 0).reshape(3, 9)
    return np.linalg.svd(mat, compute_uv=False)


def srv(psi: np.ndarray, tol: float = 1e-7) -> tuple[int, int, int]:
    """Schmidt rank vector across the three one-vs-rest bipartitions."""
    return tuple(int(np.sum(schmidt_coeffs(psi, p) > tol)) for p in range(3))  # type: ignore[return-value]


def witness_bound(psi: np.ndarray) -> float:
    """Largest fidelity any lower-dimensional entanglement structure reaches.

    Per bipartition the bound is the sum of all but the smallest squared
    Schmidt coefficient; the scalar witness threshold is the maximum over
    the three bipartitions (conservative).
    """
    bounds = []
    for party in range(3):
        lam2 = schmidt_coeffs(psi, party) ** 2
        bounds.append(float(np.sum(lam2) - np.min(lam2)))
    return max(bounds)


# --- projective decomposition of matrix elements ---------------------------

_KINDS = ("+", "-", "+i", "-i")

#: per-kind phase of the b component in (|a> + phase |b>)/sqrt(2)
_KIND_PHASE = {"+": 1.0 + 0j, "-": -1.0 + 0j, "+i": 1j, "-i": -1j}

#: weights w s.t. |a><b| = sum_kind w_kind P_kind   (derivation: expand the
#: four rank-1 projectors and solve; the diagonal parts cancel pairwise)
_LOWERING_WEIGHTS = {"+": 0.5, "-": -0.5, "+i": -0.5j, "-i": 0.5j}


@dataclass(frozen=True)
class ProjKet:
    """Single-party measurement ket: |a> or (|a> + phase |b>)/sqrt(2)."""

    a: int
    b: int | None = None
    kind: str | None = None  # one of _KINDS when b is not None

    def descriptor(self) -> str:
        if self.b is None:
            return str(self.a)
        suffix = "i" if self.kind in ("+i", "-i") else ""
        sign = "+" if self.kind in ("+", "+i") else "-"
        b_label = AUX_LABEL if self.b == AUX_IDX else str(self.b)
        return f"{self.a}{sign}{b_label}{suffix}"

    def vector(self) -> np.ndarray:
        v = np.zeros(DIM, dtype=complex)
        if self.b is None:
            v[self.a] = 1.0
            return v
        v[self.a] = 1.0
        if self.b != AUX_IDX:
            v[self.b] = _KIND_PHASE[self.kind]
        # aux component lives outside the tracked space and is dropped
        return v / math.sqrt(2.0)


AUX_IDX = -1  # sentinel index for the auxiliary mode


_DESC_RE = re.compile(r"^(-?\d+|q)(?:([+-])(-?\d+|q)(i?))?$")


def parse_descriptor(desc: str) -> ProjKet:
    m = _DESC_RE.match(desc.strip())
    if not m:
        raise ValueError(f"bad projector descriptor {desc!r}")
    a_raw, sign, b_raw, imag = m.groups()
    a = AUX_IDX if a_raw == AUX_LABEL else int(a_raw)
    if sign is None:
        if a == AUX_IDX:
            raise ValueError("bare auxiliary projector is meaningless")
        return ProjKet(a)
    b = AUX_IDX if b_raw == AUX_LABEL else int(b_raw)
    kind = sign + ("i" if imag else "")
    return ProjKet(a, b, kind)


@dataclass(frozen=True)
class PlanSetting:
    """One joint projective setting with its reconstruction weight."""

    kets: tuple[ProjKet, ProjKet, ProjKet]
    weight: complex = 0.0          # contribution to the element estimate
    element: tuple[tuple[int, int, int], tuple[int, int, int]] | None = None

    def descriptors(self) -> tuple[str, str, str]:
        return tuple(k.descriptor() for k in self.kets)  # type: ignore[return-value]

    def operator_vector(self) -> np.ndarray:
        v = self.kets[0].vector()
        for k in self.kets[1:]:
            v = np.kron(v, k.vector())
        return v

    def expectation(self, rho: np.ndarray) -> float:
        v = self.operator_vector()
        return float(np.real(v.conj() @ rho @ v))


def offdiag_projectors(
    element: tuple[Sequence[int], Sequence[int]]
) -> tuple[PlanSetting, ...]:
    """The 64 projective settings reconstructing one matrix element.

    ``element`` is ((i, j, k), (l, m, n)) in logical levels; the estimate is
    <ijk| rho |lmn> = sum over settings of weight * Tr(rho P).  Slots with
    i_slot == l_slot use the auxiliary pair (value, q) whose four projectors
    each act as half the computational projector on the tracked space.
    """
    bra, ket = (tuple(int(x) for x in side) for side in element)
    if bra == ket:
        raise ValueError("use a diagonal setting for diagonal elements")
    per_slot: list[list[tuple[ProjKet, complex]]] = []
    for a, b in zip(bra, ket):
        slot: list[tuple[ProjKet, complex]] = []
        if a == b:
            # |a><a| = (1/2) * sum of the four (a, q) projectors
            for kind in _KINDS:
                slot.append((ProjKet(a, AUX_IDX, kind), 0.5))
        else:
            # |b><a| on this slot: E_dagger with E = |a><b|
            for kind in _KINDS:
                slot.append((ProjKet(a, b, kind), _LOWERING_WEIGHTS[kind]))
        per_slot.append(slot)
    settings = []
    for k0, w0 in per_slot[0]:
        for k1, w1 in per_slot[1]:
            for k2, w2 in per_slot[2]:
                settings.append(
                    PlanSetting(kets=(k0, k1, k2), weight=w0 * w1 * w2, element=(bra, ket))
                )
    assert len(settings) == 64
    return tuple(settings)


def reconstruct_element(
    rho: np.ndarray, element: tuple[Sequence[int], Sequence[int]]
) -> complex:
    """Evaluate the 64 projector expectations and combine them.

    Equals the direct matrix entry exactly (an algebraic identity).
    """
    rho = np.asarray(rho, dtype=complex)
    total = 0j
    for setting in offdiag_projectors(element):
        total += setting.weight * setting.expectation(rho)
    return total


def element_index(levels: Sequence[int]) -> int:
    i, j, k = levels
    return 9 * i + 3 * j + k


def noise_model(params: NoiseParams) -> np.ndarray:
    """Density matrix with white noise and reduced coherence.

    rho = p * (D + c * Off) + (1 - p)/27 * I, where D and Off are the
    diagonal and off-diagonal parts of the weighted GHZ projector.  The
    construction is a convex mixture of positive operators for p, c in
    [0, 1], hence positive semidefinite.
    """
    _, ghz = ideal_ghz(params.weights)
    diag = np.diag(np.diag(ghz))
    off = ghz - diag
    rho = params.p * (diag + params.c * off) + (1.0 - params.p) / HILBERT * np.eye(HILBERT)
    return check_density_matrix(rho)


# --- measurement plan, simulated counts, fidelity estimation ---------------

#: unique off-diagonal elements entering the GHZ fidelity
WITNESS_ELEMENTS = (
    ((0, 0, 0), (1, 1, 1)),
    ((0, 0, 0), (2, 2, 2)),
    ((1, 1, 1), (2, 2, 2)),
)


def build_witness_plan() -> tuple[PlanSetting, ...]:
    """All 219 settings: 27 computational projections plus 3 x 64."""
    plan: list[PlanSetting] = []
    for i in range(3):
        for j in range(3):
            for k in range(3):
                plan.append(PlanSetting(kets=(ProjKet(i), ProjKet(j), ProjKet(k))))
    for element in WITNESS_ELEMENTS:
        plan.extend(offdiag_projectors(element))
    return tuple(plan)


@dataclass(frozen=True)
class CountRecord:
    """Simulated or measured counts for one projective setting."""

    descriptors: tuple[str, str, str]
    counts: float
    duration: float = 1.0

    def __post_init__(self) -> None:
        if self.counts < 0:
            raise ValueError("counts must be non-negative")


def simulate_counts(
    rho: np.ndarray,
    plan: Sequence[PlanSetting],
    total_events: float,
    seed: int = 0,
    sample: bool = True,
) -> tuple[CountRecord, ...]:
    """Expected or Poisson-sampled counts for every setting of the plan.

    Every setting gets equal measurement duration, so expected counts are
    proportional to Tr(rho P); the proportionality constant is fixed by the
    requested total expected number of events.
    """
    rho = np.asarray(rho, dtype=complex)
    probs = np.array([s.expectation(rho) for s in plan], dtype=float)
    probs = np.clip(probs, 0.0, None)
    lam = total_events * probs / probs.sum()
    if sample:
        rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
        counts = rng.poisson(lam).astype(float)
    else:
        counts = lam
    return tuple(
        CountRecord(descriptors=s.descriptors(), counts=float(c)) for s, c in zip(plan, counts)
    )


def _estimate_from_counts(
    counts: Mapping[tuple[str, str, str], float],
    weights: Sequence[float],
) -> float:
    w = np.asarray(weights, dtype=float)
    w = w / np.linalg.norm(w)
    diag_total = 0.0
    diag = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                c = counts[(str(i), str(j), str(k))]
                diag[i, j, k] = c
                diag_total += c
    if diag_total <= 0:
        raise ValueError("no diagonal counts; cannot normalize")
    f = sum(w[t] ** 2 * diag[t, t, t] for t in range(3)) / diag_total
    for (bra, ket) in WITNESS_ELEMENTS:
        elem = 0j
        for setting in offdiag_projectors((bra, ket)):
            elem += setting.weight * counts[setting.descriptors()] / diag_total
        t1, t2 = bra[0], ket[0]
        f += 2.0 * w[t1] * w[t2] * elem.real
    return float(f)


def estimate_fidelity(
    records: Sequence[CountRecord],
    weights: Sequence[float] = (1.0, 1.0, 1.0),
    n_resamples: int = 1000,
    seed: int = 1,
    accidentals: Mapping[tuple[str, str, str], float] | None = None,
) -> tuple[float, float]:
    """GHZ fidelity and its Monte-Carlo error from count records.

    Diagonal elements come from the 27 computational projections normalized
    by their total; off-diagonals from the 64-setting reconstruction.  The
    uncertainty is the standard deviation of the estimate over Poisson
    resamples of the observed counts (counter-keyed per-sample generators,
    so any execution order gives identical results).  Optional per-setting
    accidental counts are subtracted first, floored at zero.
    """
    observed: dict[tuple[str, str, str], float] = {}
    for rec in records:
        value = rec.counts
        if accidentals is not None:
            value = max(value - accidentals.get(rec.descriptors, 0.0), 0.0)
        observed[rec.descriptors] = observed.get(rec.descriptors, 0.0) + value
    keys = sorted(observed)
    base = _estimate_from_counts(observed, weights)
    if n_resamples <= 0:
        return base, 0.0
    lam = np.array([observed[k] for k in keys], dtype=float)
    estimates = np.empty(n_resamples, dtype=float)
    for s in range(n_resamples):
        rng = np.random.Generator(
            np.random.Philox(key=np.array([np.uint64(seed), np.uint64(s)], dtype=np.uint64))
        )
        resampled = dict(zip(keys, rng.poisson(lam).astype(float)))
        estimates[s] = _estimate_from_counts(resampled, weights)
    return base, float(np.std(estimates))
