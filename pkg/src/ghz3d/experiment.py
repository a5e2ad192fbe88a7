"""Full source-to-detectors pipeline for the three-photon GHZ experiment.

Two OAM-entangled pair sources feed four paths A..D.  Paths B and C pass an
OAM parity sorter, path A a reflection + spiral phase plate, then a 50/50
beam splitter combines A and B, and a coherent mode projection (CMP) on path
A onto (|0> + |-1>)/sqrt(2) completes the multi-port.  Post-selecting one
photon per detector leaves a three-term, three-dimensionally entangled state
on paths B, C, D.

The default mirror placement (one reflection on path C before the sorter,
one on path A between the beam splitter and the CMP) is the unique choice,
given the declared sorter and splitter conventions, that makes the surviving
term set equal the reference form:

    (|2,0,0> + |3,1,1> + |-1,-1,-1>)/sqrt(3)  on  (B, C, D)

with the two odd-odd cross combinations eliminated by two-photon
interference (HOM) at the splitter and by the CMP respectively, and with
higher-order |+-2,-+2> source terms landing outside the detected mode
subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .elements import (
    ElementSpec,
    Projector1,
    SorterConvention,
    build_element,
    project,
)
from .states import (
    ELL_MAX,
    ModeLabel,
    PhotonicState,
    apply,
    extend_identity,
    fidelity_pure,
    postselect,
    tensor,
)

PATHS = ("A", "B", "C", "D")

#: mirror stations exposed by the pipeline, in beam order
MIRROR_STATIONS = (
    "a_pre_spp",      # path A, between crystal 1 and the reflection+SPP
    "a_post_bs",      # path A, between beam splitter output and CMP
    "b_pre_sorter",   # path B, between crystal 1 and the sorter
    "b_post_sorter",  # path B, between sorter output and beam splitter
    "b_post_bs",      # path B, between beam splitter output and detector
    "c_pre_sorter",   # path C, between crystal 2 and the sorter
    "c_post_sorter",  # path C, between sorter output and detector
    "d",              # path D, between crystal 2 and detector
)

DEFAULT_MIRRORS = {"a_post_bs": 1, "c_pre_sorter": 1}

#: extra reflections reproducing the detailed-setup variant of the state,
#: (|-2,0,0> + |-3,1,-1> + |1,-1,1>)/sqrt(3)
DETAILED_SETUP_MIRRORS = {"a_post_bs": 1, "c_pre_sorter": 1, "b_post_bs": 1, "d": 1}

CMP_KET = {0: 1.0, -1: 1.0}  # normalized by Projector1.of


@dataclass(frozen=True)
class SourceAmplitudes:
    """Pair-term amplitudes of one down-conversion source.

    c0, c1, c2 weight the |0,0>, |+-1,-+1> and |+-2,-+2> pair terms;
    normalization is c0^2 + 2 c1^2 + 2 c2^2 = 1.
    """

    c0: float
    c1: float
    c2: float = 0.0

    def __post_init__(self) -> None:
        if min(self.c0, self.c1, self.c2) < 0:
            raise ValueError("source amplitudes must be non-negative")
        n = self.c0**2 + 2 * self.c1**2 + 2 * self.c2**2
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"source amplitudes not normalized: {n}")

    @classmethod
    def balanced(cls) -> "SourceAmplitudes":
        c = 1.0 / math.sqrt(3.0)
        return cls(c, c, 0.0)

    @classmethod
    def from_ratios(cls, c0_over_c1: float, c1_over_c2: float = math.inf) -> "SourceAmplitudes":
        c1 = 1.0
        c0 = c0_over_c1
        c2 = 0.0 if math.isinf(c1_over_c2) else c1 / c1_over_c2
        n = math.sqrt(c0**2 + 2 * c1**2 + 2 * c2**2)
        return cls(c0 / n, c1 / n, c2 / n)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything needed to assemble and run the four-photon pipeline."""

    source1_paths: tuple[str, str] = ("A", "B")
    source2_paths: tuple[str, str] = ("C", "D")
    source1: SourceAmplitudes = field(default_factory=SourceAmplitudes.balanced)
    source2: SourceAmplitudes = field(default_factory=SourceAmplitudes.balanced)
    mirrors: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_MIRRORS))
    sorter: SorterConvention = SorterConvention()
    overlap: float = 1.0  # temporal overlap o of the two sources, in [0, 1]
    include_c2: bool = False
    cmp_ket: Mapping[int, complex] | None = field(default_factory=lambda: dict(CMP_KET))
    elements_override: tuple[ElementSpec, ...] | None = None
    restrict_detection: bool = True  # drop modes outside the c2-free support

    def __post_init__(self) -> None:
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError("overlap must lie in [0, 1]")
        paths = (*self.source1_paths, *self.source2_paths)
        if len(set(paths)) != 4:
            raise ValueError("source paths must be four distinct paths")
        unknown = set(self.mirrors) - set(MIRROR_STATIONS)
        if unknown:
            raise ValueError(f"unknown mirror stations: {sorted(unknown)}")
        if any(int(n) < 0 for n in self.mirrors.values()):
            raise ValueError("mirror counts must be non-negative")
        object.__setattr__(self, "mirrors", {k: int(v) for k, v in self.mirrors.items()})
        object.__setattr__(self, "source1_paths", tuple(self.source1_paths))
        object.__setattr__(self, "source2_paths", tuple(self.source2_paths))
        if self.cmp_ket is not None:
            object.__setattr__(
                self, "cmp_ket", {int(k): complex(v) for k, v in self.cmp_ket.items()}
            )
        if self.elements_override is not None:
            object.__setattr__(self, "elements_override", tuple(self.elements_override))

    @property
    def detector_paths(self) -> tuple[str, str, str, str]:
        a, b = self.source1_paths
        c, d = self.source2_paths
        return (a, b, c, d)

    @property
    def ghz_paths(self) -> tuple[str, str, str]:
        """Paths carrying the three entangled photons (everything but A)."""
        return (self.source1_paths[1], *self.source2_paths)


def spdc_state(
    paths: Sequence[str],
    amps: SourceAmplitudes,
    tag: int = 0,
    include_c2: bool = False,
) -> PhotonicState:
    """Two-photon state emitted by one source into its two paths."""
    p, q = paths
    terms = {
        (ModeLabel(p, 0, tag), ModeLabel(q, 0, tag)): amps.c0,
        (ModeLabel(p, 1, tag), ModeLabel(q, -1, tag)): amps.c1,
        (ModeLabel(p, -1, tag), ModeLabel(q, 1, tag)): amps.c1,
    }
    if include_c2 and amps.c2:
        terms[(ModeLabel(p, 2, tag), ModeLabel(q, -2, tag))] = amps.c2
        terms[(ModeLabel(p, -2, tag), ModeLabel(q, 2, tag))] = amps.c2
    return PhotonicState(terms)


def pipeline_elements(cfg: PipelineConfig) -> tuple[ElementSpec, ...]:
    """The multi-port as an ordered element chain (CMP excluded)."""
    if cfg.elements_override is not None:
        return cfg.elements_override
    a, b = cfg.source1_paths
    c, d = cfg.source2_paths
    chain: list[ElementSpec] = []

    def add_mirror(station: str, path: str) -> None:
        if cfg.mirrors.get(station, 0) % 2:
            chain.append(ElementSpec("MIRROR", (path,)))

    add_mirror("a_pre_spp", a)
    add_mirror("b_pre_sorter", b)
    add_mirror("c_pre_sorter", c)
    add_mirror("d", d)
    chain.append(
        ElementSpec(
            "PARITY_SORTER",
            (b, c),
            {"odd_swaps": cfg.sorter.odd_swaps, "swap_phase": cfg.sorter.swap_phase},
        )
    )
    add_mirror("b_post_sorter", b)
    add_mirror("c_post_sorter", c)
    chain.append(ElementSpec("SPP_REFLECT", (a,)))
    chain.append(ElementSpec("BEAM_SPLITTER", (a, b)))
    add_mirror("a_post_bs", a)
    add_mirror("b_post_bs", b)
    return tuple(chain)


def _all_modes(cfg: PipelineConfig, tags: Sequence[int]) -> set[ModeLabel]:
    return {
        ModeLabel(p, ell, t)
        for p in cfg.detector_paths
        for ell in range(-ELL_MAX, ELL_MAX + 1)
        for t in tags
    }


def _apply_multiport(cfg: PipelineConfig, state: PhotonicState, tags: Sequence[int]) -> PhotonicState:
    """Send a state through the element chain, stage by stage.

    Each element map is extended by the identity on all other tracked modes,
    so a photon straying outside an element's support raises UnsupportedMode
    instead of being silently passed through.
    """
    all_modes = _all_modes(cfg, tags)
    for spec in pipeline_elements(cfg):
        state = apply(extend_identity(build_element(spec, tags=tags), all_modes), state)
    return state


@dataclass(frozen=True)
class RelabelMap:
    """Per-path OAM relabeling (value -> logical level, phase) onto the GHZ form.

    Applying the phases and reading mode values as logical levels turns the
    pipeline output into the canonical balanced GHZ state
    (|000> + |111> + |222>)/sqrt(3).
    """

    by_path: Mapping[str, Mapping[int, tuple[int, complex]]]

    def levels(self, path: str) -> tuple[int, ...]:
        """OAM values of logical levels 0, 1, 2 on a path."""
        inv = {lvl: ell for ell, (lvl, _) in self.by_path[path].items()}
        return tuple(inv[i] for i in range(len(inv)))

    def to_dict(self) -> dict:
        return {
            path: {str(ell): [lvl, [phase.real, phase.imag]] for ell, (lvl, phase) in m.items()}
            for path, m in self.by_path.items()
        }


@dataclass(frozen=True)
class PipelineResult:
    """Output of one pipeline run at a fixed tag assignment."""

    bcd_state: PhotonicState
    a_state: PhotonicState | None
    probability: float
    pre_cmp_state: PhotonicState | None
    four_photon_state: PhotonicState | None
    relabel: RelabelMap | None
    config: PipelineConfig


def factor_single_path(
    state: PhotonicState, path: str
) -> tuple[PhotonicState, PhotonicState] | None:
    """Split ``state`` as (single photon on ``path``) x (rest), if possible.

    Returns None when the path photon is entangled with the rest.  Both
    factors come back normalized; the global phase stays on the rest factor.
    """
    groups: dict[tuple[ModeLabel, ...], dict[ModeLabel, complex]] = {}
    for term in state.terms:
        own = tuple(m for m in term.occupation if m.path == path)
        rest = tuple(m for m in term.occupation if m.path != path)
        if len(own) != 1:
            return None
        groups.setdefault(rest, {})[own[0]] = term.amplitude
    rests = sorted(groups)
    ref = groups[rests[0]]
    ref_norm = math.sqrt(sum(abs(a) ** 2 for a in ref.values()))
    ref_vec = {m: a / ref_norm for m, a in ref.items()}
    rest_amps: dict[tuple[ModeLabel, ...], complex] = {}
    for rest in rests:
        vec = groups[rest]
        if set(vec) != set(ref_vec):
            return None
        scale = None
        for m, a in vec.items():
            s = a / ref_vec[m]
            if scale is None:
                scale = s
            elif abs(s - scale) > 1e-10 * max(1.0, abs(scale)):
                return None
        rest_amps[rest] = scale
    a_state = PhotonicState({(m,): a for m, a in ref_vec.items()}).normalize()
    rest_state = PhotonicState(rest_amps, state.convention).normalize()
    return a_state, rest_state


def _detection_support(cfg: PipelineConfig) -> set[tuple[str, int]] | None:
    """(path, OAM) support of the c2-free run; detection is restricted to it.

    Photons in higher-order modes still reach the detectors, but the
    projective measurements only address the three logical modes per path,
    so those events never enter the recorded state.
    """
    if not cfg.restrict_detection:
        return None
    if not (cfg.include_c2 and max(cfg.source1.c2, cfg.source2.c2) > 0):
        return None
    base = replace(cfg, include_c2=False, restrict_detection=False)
    res = _run_once(base, tags=(0, 0))
    if res.pre_cmp_state is None:
        return None
    return {(m.path, m.oam) for m in res.pre_cmp_state.modes()}


def _run_once(
    cfg: PipelineConfig,
    tags: tuple[int, int] = (0, 0),
    support: set[tuple[str, int]] | None = None,
) -> PipelineResult:
    """One coherent pipeline run with fixed per-source tags."""
    tag_set = tuple(sorted(set(tags)))
    src = tensor(
        spdc_state(cfg.source1_paths, cfg.source1, tags[0], cfg.include_c2),
        spdc_state(cfg.source2_paths, cfg.source2, tags[1], cfg.include_c2),
    )
    transformed = _apply_multiport(cfg, src, tag_set)
    selected, p_select = postselect(transformed, cfg.detector_paths)
    if support is not None and not selected.is_zero:
        kept = {
            term.occupation: term.amplitude
            for term in selected.terms
            if all((m.path, m.oam) in support for m in term.occupation)
        }
        weight = sum(abs(a) ** 2 for a in kept.values())
        selected = PhotonicState(kept, selected.convention)
        p_select *= weight
        if not selected.is_zero:
            selected = selected.normalize()
    if selected.is_zero:
        return PipelineResult(selected, None, 0.0, None, None, None, cfg)

    pre_cmp = selected
    if cfg.cmp_ket is None:
        four = pre_cmp
        probability = p_select
    else:
        cmp_proj = Projector1.of(cfg.source1_paths[0], cfg.cmp_ket)
        four, p_cmp = project(cmp_proj, pre_cmp)
        probability = p_select * p_cmp
        if four.is_zero:
            return PipelineResult(four, None, 0.0, pre_cmp, None, None, cfg)

    factored = factor_single_path(four, cfg.source1_paths[0])
    if factored is None:
        a_state: PhotonicState | None = None
        bcd = four
    else:
        a_state, bcd = factored
    relab = ghz_relabel_map(bcd, cfg.ghz_paths) if a_state is not None else None
    return PipelineResult(bcd, a_state, probability, pre_cmp, four, relab, cfg)


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Run the pipeline at the indistinguishable point (equal tags).

    For overlap o < 1 the reported probability is the convex mix
    o * P(equal tags) + (1 - o) * P(distinct tags); the returned states are
    those of the coherent, equal-tag branch.
    """
    support = _detection_support(cfg)
    res = _run_once(cfg, tags=(0, 0), support=support)
    if cfg.overlap < 1.0:
        distinct = _run_once(cfg, tags=(1, 2), support=support)
        probability = cfg.overlap * res.probability + (1 - cfg.overlap) * distinct.probability
        res = replace(res, probability=probability)
    return res


def ghz_relabel_map(
    bcd_state: PhotonicState, ghz_paths: Sequence[str], tol: float = 1e-10
) -> RelabelMap | None:
    """Declared relabeling turning the pipeline output into the balanced GHZ.

    Requires three equal-weight terms with per-path distinct OAM values.
    Logical level order follows the last path's values taken mod 3 when that
    is a permutation of (0, 1, 2), canonical term order otherwise.  Phases
    are pushed onto the first path's modes.
    """
    terms = bcd_state.terms
    if len(terms) != 3:
        return None
    weights = [abs(t.amplitude) for t in terms]
    if max(weights) - min(weights) > tol:
        return None
    values: dict[str, list[int]] = {p: [] for p in ghz_paths}
    for t in terms:
        by_path = {m.path: m.oam for m in t.occupation}
        if set(by_path) != set(ghz_paths):
            return None
        for p in ghz_paths:
            values[p].append(by_path[p])
    for p in ghz_paths:
        if len(set(values[p])) != 3:
            return None

    last = ghz_paths[-1]
    if sorted(v % 3 for v in values[last]) == [0, 1, 2]:
        order = sorted(range(3), key=lambda i: values[last][i] % 3)
    else:
        order = list(range(3))

    by_path: dict[str, dict[int, tuple[int, complex]]] = {p: {} for p in ghz_paths}
    for level, idx in enumerate(order):
        amp = terms[idx].amplitude
        phase = (amp / abs(amp)).conjugate()
        for p in ghz_paths:
            ph = phase if p == ghz_paths[0] else 1.0 + 0j
            by_path[p][values[p][idx]] = (level, ph)
    return RelabelMap(by_path)


def logical_state_vector(
    bcd_state: PhotonicState, relab: RelabelMap, ghz_paths: Sequence[str]
) -> np.ndarray:
    """27-component logical vector of a three-photon state under a relabeling."""
    vec = np.zeros(27, dtype=complex)
    for term in bcd_state.terms:
        by_path = {m.path: m.oam for m in term.occupation}
        idx = 0
        phase = 1.0 + 0j
        for p in ghz_paths:
            level, ph = relab.by_path[p][by_path[p]]
            idx = idx * 3 + level
            phase *= ph
        vec[idx] += term.amplitude * phase
    n = np.linalg.norm(vec)
    return vec / n if n else vec


EVEN, ODD_PLUS, ODD_MINUS = "even", "odd+", "odd-"
TERM_KINDS = (EVEN, ODD_PLUS, ODD_MINUS)

SURVIVES = "SURVIVES"
PARITY_BLOCKED = "PARITY_BLOCKED"
CROSS_BLOCKED = "CROSS_BLOCKED"


def _single_term_source(kind: str, paths: Sequence[str], tag: int) -> PhotonicState:
    p, q = paths
    ells = {EVEN: (0, 0), ODD_PLUS: (1, -1), ODD_MINUS: (-1, 1)}[kind]
    return PhotonicState({(ModeLabel(p, ells[0], tag), ModeLabel(q, ells[1], tag)): 1.0})


@dataclass(frozen=True)
class ComboReport:
    verdict: str
    hom_involved: bool
    cmp_blocked: bool
    probability: float


@dataclass(frozen=True)
class TermClassification:
    """Verdict and mechanism flags for each of the nine four-photon combos."""

    combos: Mapping[tuple[str, str], ComboReport]

    def count(self, verdict: str) -> int:
        return sum(1 for r in self.combos.values() if r.verdict == verdict)

    def survivors(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted(k for k, r in self.combos.items() if r.verdict == SURVIVES))


def _combo_probability(
    cfg: PipelineConfig, kinds: tuple[str, str], tags: tuple[int, int], with_cmp: bool
) -> float:
    tag_set = tuple(sorted(set(tags)))
    src = tensor(
        _single_term_source(kinds[0], cfg.source1_paths, tags[0]),
        _single_term_source(kinds[1], cfg.source2_paths, tags[1]),
    )
    transformed = _apply_multiport(cfg, src, tag_set)
    selected, p = postselect(transformed, cfg.detector_paths)
    if p == 0.0 or not with_cmp or cfg.cmp_ket is None:
        return p
    cmp_proj = Projector1.of(cfg.source1_paths[0], cfg.cmp_ket)
    _, p_cmp = project(cmp_proj, selected)
    return p * p_cmp


def _sorter_parity_blocked(cfg: PipelineConfig, kinds: tuple[str, str]) -> bool:
    """True when the sorter alone already precludes one photon per path."""
    src = tensor(
        _single_term_source(kinds[0], cfg.source1_paths, 0),
        _single_term_source(kinds[1], cfg.source2_paths, 0),
    )
    chain: list[ElementSpec] = []
    for spec in pipeline_elements(cfg):
        if spec.kind == "PARITY_SORTER":
            chain.append(spec)
            break
        if spec.kind == "MIRROR":
            chain.append(spec)
    all_modes = _all_modes(cfg, (0,))
    state = src
    for spec in chain:
        state = apply(extend_identity(build_element(spec, tags=(0,)), all_modes), state)
    detector = sorted(cfg.detector_paths)
    for term in state.terms:
        if sorted(m.path for m in term.occupation) == detector:
            return False
    return True


def classify_terms(cfg: PipelineConfig) -> TermClassification:
    """Run each of the nine pair-term combinations through the pipeline.

    SURVIVES: nonzero four-fold probability with indistinguishable photons.
    PARITY_BLOCKED: the sorter's parity routing already precludes a photon
    in every path.  CROSS_BLOCKED: everything else; mechanism flags record
    whether two-photon interference at the splitter is involved (probability
    changes for distinguishable photons) and whether the CMP is what blocks
    the four-fold event.
    """
    reports: dict[tuple[str, str], ComboReport] = {}
    for k1 in TERM_KINDS:
        for k2 in TERM_KINDS:
            kinds = (k1, k2)
            p_ind = _combo_probability(cfg, kinds, (0, 0), with_cmp=True)
            p_dis = _combo_probability(cfg, kinds, (1, 2), with_cmp=True)
            hom = abs(p_ind - p_dis) > 1e-12
            if p_ind > 1e-12:
                verdict = SURVIVES
                cmp_blocked = False
            elif _sorter_parity_blocked(cfg, kinds):
                verdict = PARITY_BLOCKED
                cmp_blocked = False
            else:
                verdict = CROSS_BLOCKED
                p_nocmp = _combo_probability(cfg, kinds, (0, 0), with_cmp=False)
                cmp_blocked = p_nocmp > 1e-12
            reports[kinds] = ComboReport(verdict, hom, cmp_blocked, p_ind)
    return TermClassification(reports)


def _projected_fourfold(
    cfg: PipelineConfig, projection: Mapping[str, Projector1], tags: tuple[int, int]
) -> float:
    tag_set = tuple(sorted(set(tags)))
    src = tensor(
        spdc_state(cfg.source1_paths, cfg.source1, tags[0], cfg.include_c2),
        spdc_state(cfg.source2_paths, cfg.source2, tags[1], cfg.include_c2),
    )
    transformed = _apply_multiport(cfg, src, tag_set)
    state, p = postselect(transformed, cfg.detector_paths)
    if p == 0.0:
        return 0.0
    for path in cfg.detector_paths:
        state, p_proj = project(projection[path], state)
        p *= p_proj
        if p == 0.0:
            return 0.0
    return p


def hom_scan(
    cfg: PipelineConfig,
    projection: Mapping[str, Projector1],
    overlaps: Sequence[float],
) -> tuple[tuple[float, float], ...]:
    """Four-fold probability vs temporal overlap for a projective setting.

    ``projection`` supplies one single-photon projector per detector path
    (the path-A projector plays the role of the CMP).  Each probability is
    the convex mix o * P(indistinguishable) + (1 - o) * P(distinguishable).
    """
    if set(projection) != set(cfg.detector_paths):
        raise ValueError("need exactly one projector per detector path")
    p_ind = _projected_fourfold(cfg, projection, (0, 0))
    p_dis = _projected_fourfold(cfg, projection, (1, 2))
    out = []
    for o in overlaps:
        if not 0.0 <= o <= 1.0:
            raise ValueError("overlap values must lie in [0, 1]")
        out.append((float(o), o * p_ind + (1 - o) * p_dis))
    return tuple(out)


def factorization_check(
    four_photon_state: PhotonicState,
    a_state: PhotonicState,
    bcd_state: PhotonicState,
    tol: float = 1e-10,
) -> bool:
    """Whether the detected multi-photon state is (photon A) x (rest)."""
    product = tensor(a_state, bcd_state)
    return fidelity_pure(four_photon_state, product) >= 1.0 - tol
