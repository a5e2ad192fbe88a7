"""Factories for the linear-optical elements of the multi-port.

Every factory returns a :class:`~ghz3d.states.LinearMap` over an explicit
mode space: the caller chooses which paths, OAM values and tags the map
supports (identity on absent modes is never implied).  Default OAM range is
the full tracked window |l| <= ELL_MAX and the single default tag 0.

Conventions declared once, here:

* beam splitter: symmetric 50/50, a† -> (c† + i d†)/sqrt(2),
  b† -> (i c† + d†)/sqrt(2), identical for every (OAM, tag);
* mirror: l -> -l with phase +1;
* reflection + spiral phase plate: l -> -l + 2 with phase +1;
* parity sorter: even stays / odd swaps by default, phases +1; the routing
  and swap phase are constructor parameters since four conventions are
  physically sensible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .states import (
    ELL_MAX,
    LinearMap,
    ModeLabel,
    PhotonicState,
)

DEFAULT_TAGS = (0,)


class NotUnitary(ValueError):
    """Matrix handed to local_unitary is not unitary."""


def _ells(ells: Iterable[int] | None) -> tuple[int, ...]:
    if ells is None:
        return tuple(range(-ELL_MAX, ELL_MAX + 1))
    return tuple(ells)


def mirror(
    path: str, ells: Iterable[int] | None = None, tags: Sequence[int] = DEFAULT_TAGS
) -> LinearMap:
    """Reflection: flips the OAM sign on one path.  Involution."""
    entries = {}
    for ell in _ells(ells):
        for t in tags:
            entries[ModeLabel(path, ell, t)] = ((ModeLabel(path, -ell, t), 1.0),)
    return LinearMap(entries, unitary=True)


def spp_reflect(
    path: str, ells: Iterable[int] | None = None, tags: Sequence[int] = DEFAULT_TAGS
) -> LinearMap:
    """Reflection combined with a charge-2 spiral phase plate: l -> -l + 2.

    Supported on |l| <= ELL_MAX - 2 so the image stays inside the tracked
    OAM window; an involution on its support.
    """
    if ells is None:
        ells = range(-(ELL_MAX - 2), ELL_MAX - 2 + 1)
    entries = {}
    for ell in ells:
        for t in tags:
            entries[ModeLabel(path, ell, t)] = ((ModeLabel(path, -ell + 2, t), 1.0),)
    return LinearMap(entries, unitary=True)


def beam_splitter(
    p1: str,
    p2: str,
    ells: Iterable[int] | None = None,
    tags: Sequence[int] = DEFAULT_TAGS,
) -> LinearMap:
    """Symmetric 50/50 beam splitter combining two paths, per (OAM, tag)."""
    if p1 == p2:
        raise ValueError("beam splitter needs two distinct paths")
    s = 1.0 / math.sqrt(2.0)
    entries = {}
    for ell in _ells(ells):
        for t in tags:
            m1 = ModeLabel(p1, ell, t)
            m2 = ModeLabel(p2, ell, t)
            entries[m1] = ((m1, s), (m2, 1j * s))
            entries[m2] = ((m1, 1j * s), (m2, s))
    return LinearMap(entries, unitary=True)


@dataclass(frozen=True)
class SorterConvention:
    """Routing convention of the interferometric OAM parity sorter."""

    odd_swaps: bool = True  # False: even parity swaps paths instead
    swap_phase: complex = 1.0

    def validate(self) -> None:
        if abs(abs(self.swap_phase) - 1.0) > 1e-12:
            raise ValueError("swap phase must be unimodular")


def parity_sorter(
    p1: str,
    p2: str,
    convention: SorterConvention = SorterConvention(),
    ells: Iterable[int] | None = None,
    tags: Sequence[int] = DEFAULT_TAGS,
) -> LinearMap:
    """Interferometric sorter routing photons by OAM parity.

    OAM values are preserved; only the path changes.  With the default
    convention even l stays in its input path and odd l crosses.
    """
    if p1 == p2:
        raise ValueError("parity sorter needs two distinct paths")
    convention.validate()
    entries = {}
    for ell in _ells(ells):
        crosses = (ell % 2 == 1) == convention.odd_swaps
        for t in tags:
            m1 = ModeLabel(p1, ell, t)
            m2 = ModeLabel(p2, ell, t)
            if crosses:
                entries[m1] = ((ModeLabel(p2, ell, t), convention.swap_phase),)
                entries[m2] = ((ModeLabel(p1, ell, t), convention.swap_phase),)
            else:
                entries[m1] = ((m1, 1.0),)
                entries[m2] = ((m2, 1.0),)
    return LinearMap(entries, unitary=True)


def local_unitary(
    path: str,
    matrix: np.ndarray,
    basis: Sequence[int],
    tags: Sequence[int] = DEFAULT_TAGS,
    tol: float = 1e-10,
) -> LinearMap:
    """Unitary acting on a 3-level OAM span of one path, identity elsewhere.

    ``matrix[j, k]`` is the amplitude for basis[k] -> basis[j].
    """
    u = np.asarray(matrix, dtype=complex)
    if u.shape != (len(basis), len(basis)):
        raise ValueError("matrix shape must match basis length")
    if not np.allclose(u.conj().T @ u, np.eye(len(basis)), atol=tol):
        raise NotUnitary("matrix fails unitarity check")
    entries = {}
    basis = list(basis)
    for t in tags:
        for k, ell in enumerate(basis):
            image = tuple(
                (ModeLabel(path, basis[j], t), complex(u[j, k]))
                for j in range(len(basis))
                if u[j, k] != 0
            )
            entries[ModeLabel(path, ell, t)] = image
        for ell in _ells(None):
            m = ModeLabel(path, ell, t)
            if m not in entries:
                entries[m] = ((m, 1.0),)
    return LinearMap(entries, unitary=True)


def relabel(
    path: str,
    mapping: Mapping[int, tuple[int, complex]],
    tags: Sequence[int] = DEFAULT_TAGS,
) -> LinearMap:
    """Permutation-with-phases of OAM values on one path (a mode relabeling)."""
    images = [v for v, _ in mapping.values()]
    if len(set(images)) != len(images):
        raise ValueError("relabeling must be injective")
    entries = {}
    for t in tags:
        for old, (new, phase) in mapping.items():
            entries[ModeLabel(path, old, t)] = ((ModeLabel(path, new, t), phase),)
    return LinearMap(entries, unitary=True)


@dataclass(frozen=True)
class Projector1:
    """Single-photon projection onto a fixed OAM superposition in one path."""

    path: str
    ket: tuple[tuple[int, complex], ...]

    def __post_init__(self) -> None:
        norm = math.sqrt(sum(abs(c) ** 2 for _, c in self.ket))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"projector ket norm {norm} != 1")

    @classmethod
    def of(cls, path: str, components: Mapping[int, complex]) -> "Projector1":
        norm = math.sqrt(sum(abs(c) ** 2 for c in components.values()))
        ket = tuple(sorted((ell, c / norm) for ell, c in components.items()))
        return cls(path, ket)


def project(proj: Projector1, state: PhotonicState) -> tuple[PhotonicState, float]:
    """Apply |k><k| on the projector path; the photon stays in state k.

    Terms whose projector path is not singly occupied are annihilated
    (the projector lives in the single-photon subspace of that path).
    Returns the conditional state and the projection probability.
    """
    coeffs = dict(proj.ket)
    out: dict = {}
    for term in state.terms:
        in_path = [m for m in term.occupation if m.path == proj.path]
        if len(in_path) != 1:
            continue
        mode = in_path[0]
        overlap = coeffs.get(mode.oam)
        if not overlap:
            continue
        rest = tuple(m for m in term.occupation if m.path != proj.path)
        amp = term.amplitude * overlap.conjugate()
        for ell, c in proj.ket:
            key = tuple(sorted(rest + (ModeLabel(proj.path, ell, mode.tag),)))
            out[key] = out.get(key, 0.0) + amp * c
    projected = PhotonicState(out, state.convention).prune()
    if projected.is_zero:
        return projected, 0.0
    prob = projected.norm() ** 2
    return projected.normalize(), prob


ELEMENT_KINDS = (
    "SPP_REFLECT",
    "MIRROR",
    "BEAM_SPLITTER",
    "PARITY_SORTER",
    "LOCAL_UNITARY",
    "RELABEL",
)


@dataclass(frozen=True)
class ElementSpec:
    """Declarative description of one optical element, JSON-serializable.

    Serialized field names are ``kind``, ``paths``, ``params``; this is the
    schema the CLI pipeline config consumes for custom element chains.
    """

    kind: str
    paths: tuple[str, ...]
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ELEMENT_KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        if not self.paths:
            raise ValueError("element needs at least one path")
        if self.kind in ("BEAM_SPLITTER", "PARITY_SORTER") and len(self.paths) != 2:
            raise ValueError(f"{self.kind} takes exactly 2 paths")
        object.__setattr__(self, "paths", tuple(self.paths))
        object.__setattr__(self, "params", dict(self.params))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "paths": list(self.paths), "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: Mapping[str, object]) -> "ElementSpec":
        return cls(str(d["kind"]), tuple(d.get("paths", ())), dict(d.get("params", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "ElementSpec":
        return cls.from_dict(json.loads(s))


def build_element(spec: ElementSpec, tags: Sequence[int] = DEFAULT_TAGS) -> LinearMap:
    """Instantiate the LinearMap described by an ElementSpec."""
    p = spec.params
    if spec.kind == "MIRROR":
        return mirror(spec.paths[0], tags=tags)
    if spec.kind == "SPP_REFLECT":
        return spp_reflect(spec.paths[0], tags=tags)
    if spec.kind == "BEAM_SPLITTER":
        return beam_splitter(spec.paths[0], spec.paths[1], tags=tags)
    if spec.kind == "PARITY_SORTER":
        conv = SorterConvention(
            odd_swaps=bool(p.get("odd_swaps", True)),
            swap_phase=complex(p.get("swap_phase", 1.0)),
        )
        return parity_sorter(spec.paths[0], spec.paths[1], conv, tags=tags)
    if spec.kind == "LOCAL_UNITARY":
        return local_unitary(
            spec.paths[0], np.asarray(p["matrix"], dtype=complex), tuple(p["basis"]), tags=tags
        )
    if spec.kind == "RELABEL":
        mapping = {
            int(old): (int(new), complex(phase) if not isinstance(phase, (list, tuple)) else complex(*phase))
            for old, (new, phase) in dict(p["mapping"]).items()
        }
        return relabel(spec.paths[0], mapping, tags=tags)
    raise ValueError(f"unknown element kind {spec.kind!r}")
