"""Value-semantic algebra of multi-photon states over labeled optical modes.

A mode is a (path, OAM, tag) triple.  States are finite superpositions of
creation-operator monomials acting on the vacuum; linear-optical elements are
mode-to-superposition substitution maps.  Bosonic statistics (HOM bunching,
stimulated terms) fall out of the polynomial algebra automatically.

Two amplitude conventions exist:

* ``monomial`` -- amplitudes are coefficients of creation-operator monomials,
  so a term ``a (a†_m)^2 |0>`` stores amplitude ``a``.
* ``normalized-fock`` -- amplitudes include the 1/sqrt(n!) Fock normalization,
  i.e. they are coefficients of orthonormal Fock kets.

All algebra is done on monomial coefficients; the Fock normalization
``sqrt(prod n_m!)`` is applied only at amplitude extraction and norms.

Everything here is an immutable value; all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

ELL_MAX = 5  # largest |OAM| quantum number tracked by the simulator

MONOMIAL = "monomial"
NORMALIZED_FOCK = "normalized-fock"

PRUNE_EPS = 1e-14  # amplitude pruning threshold after each map application


class UnsupportedMode(Exception):
    """A map was applied to a state occupying a mode outside its support."""


class PathCollision(ValueError):
    """Tensor product of states sharing an occupied path."""


class NotNormalized(ValueError):
    """Operation requires unit-norm input states."""


@dataclass(frozen=True, order=True)
class ModeLabel:
    """A single optical mode: path id, OAM value, distinguishability tag.

    Tag 0 is the default spectral mode; photons with different tags never
    interfere.  Ordering is lexicographic in (path, oam, tag), which fixes
    the canonical occupation order used for term merging.
    """

    path: str
    oam: int
    tag: int = 0

    def __post_init__(self) -> None:
        if abs(self.oam) > ELL_MAX:
            raise ValueError(f"|OAM|={abs(self.oam)} exceeds ELL_MAX={ELL_MAX}")


Occupation = tuple[ModeLabel, ...]


def _canonical(modes: Iterable[ModeLabel]) -> Occupation:
    return tuple(sorted(modes))


@dataclass(frozen=True)
class FockTerm:
    """One creation-operator monomial with its complex amplitude."""

    amplitude: complex
    occupation: Occupation


def _occupation_factorial(occ: Occupation) -> float:
    """prod n_m! over the multiset of modes in occ."""
    out = 1.0
    run = 1
    for i in range(1, len(occ) + 1):
        if i < len(occ) and occ[i] == occ[i - 1]:
            run += 1
        else:
            out *= math.factorial(run)
            run = 1
    return out


class PhotonicState:
    """A finite superposition of same-photon-number Fock terms."""

    __slots__ = ("_terms", "convention")

    def __init__(
        self,
        terms: Mapping[Occupation, complex] | Iterable[tuple[Occupation, complex]],
        convention: str = MONOMIAL,
    ) -> None:
        if convention not in (MONOMIAL, NORMALIZED_FOCK):
            raise ValueError(f"unknown convention {convention!r}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[Occupation, complex] = {}
        for occ, amp in items:
            occ = _canonical(occ)
            merged[occ] = merged.get(occ, 0.0) + complex(amp)
        merged = {occ: a for occ, a in merged.items() if a != 0}
        sizes = {len(occ) for occ in merged}
        if len(sizes) > 1:
            raise ValueError(f"inhomogeneous photon numbers: {sorted(sizes)}")
        self._terms = merged
        self.convention = convention

    @classmethod
    def vacuum(cls) -> "PhotonicState":
        return cls({(): 1.0})

    @classmethod
    def single(cls, mode: ModeLabel, amplitude: complex = 1.0) -> "PhotonicState":
        return cls({(mode,): amplitude})

    @property
    def terms(self) -> tuple[FockTerm, ...]:
        return tuple(
            FockTerm(self._terms[occ], occ) for occ in sorted(self._terms)
        )

    @property
    def num_terms(self) -> int:
        return len(self._terms)

    @property
    def photon_number(self) -> int:
        if not self._terms:
            return 0
        return len(next(iter(self._terms)))

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def paths(self) -> set[str]:
        return {m.path for occ in self._terms for m in occ}

    def modes(self) -> set[ModeLabel]:
        return {m for occ in self._terms for m in occ}

    def amplitude(self, occupation: Iterable[ModeLabel], convention: str | None = None) -> complex:
        """Stored amplitude of an occupation in the requested convention (0 if absent)."""
        occ = _canonical(occupation)
        amp = self._terms.get(occ, 0.0)
        if amp == 0:
            return 0.0
        want = convention or self.convention
        if want == self.convention:
            return amp
        factor = math.sqrt(_occupation_factorial(occ))
        if self.convention == MONOMIAL and want == NORMALIZED_FOCK:
            return amp * factor
        return amp / factor

    def norm(self) -> float:
        """Physical (Fock) norm of the state."""
        total = 0.0
        for occ, amp in self._terms.items():
            w = abs(amp) ** 2
            if self.convention == MONOMIAL:
                w *= _occupation_factorial(occ)
            total += w
        return math.sqrt(total)

    def normalize(self) -> "PhotonicState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return self.scale(1.0 / n)

    def scale(self, factor: complex) -> "PhotonicState":
        return PhotonicState(
            {occ: amp * factor for occ, amp in self._terms.items()}, self.convention
        )

    def to_convention(self, convention: str) -> "PhotonicState":
        if convention == self.convention:
            return self
        return PhotonicState(
            {occ: self.amplitude(occ, convention) for occ in self._terms}, convention
        )

    def prune(self, eps: float = PRUNE_EPS) -> "PhotonicState":
        return PhotonicState(
            {occ: a for occ, a in self._terms.items() if abs(a) > eps}, self.convention
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhotonicState):
            return NotImplemented
        return self.convention == other.convention and self._terms == other._terms

    def __repr__(self) -> str:
        parts = []
        for occ in sorted(self._terms)[:6]:
            modes = ",".join(f"{m.path}:{m.oam}" + (f"#{m.tag}" if m.tag else "") for m in occ)
            parts.append(f"({self._terms[occ]:.4g})|{modes}>")
        more = "" if len(self._terms) <= 6 else f" ... ({len(self._terms)} terms)"
        return f"PhotonicState[{self.convention}] " + " + ".join(parts) + more


@dataclass(frozen=True)
class LinearMap:
    """A linear-optical element as a mode -> superposition-of-modes map.

    ``entries`` maps every supported input mode to its image, a tuple of
    (output mode, coefficient) pairs.  ``unitary`` asserts column
    orthonormality of the coefficient matrix restricted to the support.
    """

    entries: Mapping[ModeLabel, tuple[tuple[ModeLabel, complex], ...]]
    unitary: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", dict(self.entries))
        if self.unitary and not self.check_unitary():
            raise ValueError("map declared unitary but fails column orthonormality")

    @property
    def support(self) -> set[ModeLabel]:
        return set(self.entries)

    def image(self, mode: ModeLabel) -> tuple[tuple[ModeLabel, complex], ...]:
        try:
            return self.entries[mode]
        except KeyError:
            raise UnsupportedMode(f"mode {mode} not in map support") from None

    def check_unitary(self, tol: float = 1e-12) -> bool:
        """Column orthonormality of the support-restricted coefficient matrix."""
        cols = sorted(self.entries)
        for i, ci in enumerate(cols):
            for cj in cols[i:]:
                dot = 0.0
                row_i = dict(self.entries[ci])
                for mode, coeff in self.entries[cj]:
                    dot += row_i.get(mode, 0.0).conjugate() * coeff
                want = 1.0 if ci == cj else 0.0
                if abs(dot - want) > tol:
                    return False
        return True


def identity_map(modes: Iterable[ModeLabel]) -> LinearMap:
    return LinearMap({m: ((m, 1.0),) for m in modes}, unitary=True)


def extend_identity(m: LinearMap, modes: Iterable[ModeLabel]) -> LinearMap:
    """Extend a map by the identity on additional modes.

    Modes already in the support, or hit by the existing image, are skipped:
    adding identity on an image mode would destroy injectivity (and the
    unitary flag).  Such modes stay unsupported and occupying them raises
    UnsupportedMode downstream, which keeps truncation errors loud.
    """
    entries = dict(m.entries)
    image = {dst for img in m.entries.values() for dst, _ in img}
    for mode in modes:
        if mode not in entries and mode not in image:
            entries[mode] = ((mode, 1.0),)
    return LinearMap(entries, unitary=m.unitary)


def compose(outer: LinearMap, inner: LinearMap) -> LinearMap:
    """Map equal to applying ``inner`` first, then ``outer``.

    Every output mode of ``inner`` must be supported by ``outer``.
    The composition of two unitary-flagged maps is unitary-flagged.
    """
    entries: dict[ModeLabel, tuple[tuple[ModeLabel, complex], ...]] = {}
    for src, image in inner.entries.items():
        acc: dict[ModeLabel, complex] = {}
        for mid, c1 in image:
            for dst, c2 in outer.image(mid):
                acc[dst] = acc.get(dst, 0.0) + c1 * c2
        entries[src] = tuple(sorted(((m, c) for m, c in acc.items() if c != 0)))
    return LinearMap(entries, unitary=outer.unitary and inner.unitary)


def apply(m: LinearMap, state: PhotonicState) -> PhotonicState:
    """Substitute every creation operator through the map and expand.

    Raises UnsupportedMode if the state occupies a mode missing from the
    map support; identity on absent modes is never assumed.
    """
    work = state if state.convention == MONOMIAL else state.to_convention(MONOMIAL)
    out: dict[Occupation, complex] = {}
    for occ, amp in work._terms.items():
        partial: list[tuple[list[ModeLabel], complex]] = [([], amp)]
        for mode in occ:
            image = m.image(mode)
            partial = [
                (modes + [dst], a * c)
                for modes, a in partial
                for dst, c in image
            ]
        for modes, a in partial:
            key = _canonical(modes)
            out[key] = out.get(key, 0.0) + a
    result = PhotonicState(out, MONOMIAL).prune()
    if state.convention != MONOMIAL:
        result = result.to_convention(state.convention)
    return result


def tensor(s1: PhotonicState, s2: PhotonicState) -> PhotonicState:
    """Product state of two states on disjoint path sets."""
    if s1.convention != s2.convention:
        raise ValueError("tensor requires matching amplitude conventions")
    shared = s1.paths() & s2.paths()
    if shared:
        raise PathCollision(f"paths occupied on both factors: {sorted(shared)}")
    out: dict[Occupation, complex] = {}
    for occ1, a1 in s1._terms.items():
        for occ2, a2 in s2._terms.items():
            out[_canonical(occ1 + occ2)] = a1 * a2
    return PhotonicState(out, s1.convention)


def postselect(
    state: PhotonicState, detector_paths: Iterable[str]
) -> tuple[PhotonicState, float]:
    """Condition on exactly one photon per detector path and none elsewhere.

    Returns the renormalized conditional state and the pre-normalization
    probability (squared Fock norm of the selected component).  Probability 0
    with an empty state signals an empty result; it is not an error.
    """
    wanted = set(detector_paths)
    kept: dict[Occupation, complex] = {}
    for occ, amp in state._terms.items():
        paths = [m.path for m in occ]
        if set(paths) != wanted or len(paths) != len(wanted):
            continue
        kept[occ] = amp
    if not kept:
        return PhotonicState({}, state.convention), 0.0
    # selected terms are singly occupied, so monomial == normalized-fock
    prob = sum(abs(a) ** 2 for a in kept.values())
    selected = PhotonicState(kept, state.convention)
    return selected.normalize(), prob


def amplitude(
    state: PhotonicState, occupation: Iterable[ModeLabel], convention: str | None = None
) -> complex:
    return state.amplitude(occupation, convention)


def inner(s1: PhotonicState, s2: PhotonicState) -> complex:
    """Physical inner product <s1|s2> respecting Fock normalization."""
    total = 0.0
    for occ, a2 in s2._terms.items():
        a1 = s1._terms.get(occ)
        if a1 is None:
            continue
        w = a1.conjugate() * a2
        if s1.convention == MONOMIAL:
            w *= math.sqrt(_occupation_factorial(occ))
        if s2.convention == MONOMIAL:
            w *= math.sqrt(_occupation_factorial(occ))
        total += w
    return total


def fidelity_pure(s1: PhotonicState, s2: PhotonicState, norm_tol: float = 1e-9) -> float:
    """|<s1|s2>|^2 for normalized pure states of equal photon number."""
    for s in (s1, s2):
        if abs(s.norm() - 1.0) > norm_tol:
            raise NotNormalized(f"state norm {s.norm()} deviates from 1 by more than {norm_tol}")
    if s1.photon_number != s2.photon_number:
        raise ValueError("fidelity requires equal photon numbers")
    return min(abs(inner(s1, s2)) ** 2, 1.0)
