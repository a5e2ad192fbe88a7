"""Batch command-line front end.

Subcommands: ``simulate | hom | witness | mermin | counts``.  Each reads an
optional JSON config (defaults are built in), writes JSON/CSV artifacts into
``--out``, and is byte-deterministic for a fixed config and seed.  Numbers
are serialized with 12 significant digits.  Exit codes: 0 success, 2 config
or input validation failure, 1 internal error.

File schemas are documented in docs/file-formats.md.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import contradiction, counts as counts_mod, spectral, tomography
from .elements import ElementSpec, SorterConvention
from .experiment import (
    DEFAULT_MIRRORS,
    PipelineConfig,
    SourceAmplitudes,
    classify_terms,
    factorization_check,
    logical_state_vector,
    run_pipeline,
)
from .states import PhotonicState

DEFAULT_SEED = 333  # documented fixed default; three levels, three photons


class ConfigError(ValueError):
    """Invalid or unreadable configuration input."""


# --- deterministic serialization -------------------------------------------


def _sig12(x: float) -> float:
    return float(f"{x:.12g}")


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [_sig12(obj.real), _sig12(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _sig12(float(obj))
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dump_json(obj: Any, path: Path) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def state_to_dict(state: PhotonicState) -> dict:
    """JSON form of a photonic state (the debugging dump schema)."""
    return {
        "convention": state.convention,
        "photon_number": state.photon_number,
        "terms": [
            {
                "modes": [{"path": m.path, "oam": m.oam, "tag": m.tag} for m in t.occupation],
                "amplitude": complex(t.amplitude),
            }
            for t in state.terms
        ],
    }


# --- config ingestion -------------------------------------------------------


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _source_from(cfg: Mapping[str, Any] | None) -> SourceAmplitudes:
    if not cfg:
        return SourceAmplitudes.balanced()
    if "c0_over_c1" in cfg:
        return SourceAmplitudes.from_ratios(
            float(cfg["c0_over_c1"]), float(cfg.get("c1_over_c2", float("inf")))
        )
    return SourceAmplitudes(
        float(cfg.get("c0", 0.0)), float(cfg.get("c1", 0.0)), float(cfg.get("c2", 0.0))
    )


def pipeline_config_from(cfg: Mapping[str, Any]) -> PipelineConfig:
    p = cfg.get("pipeline", {})
    if not isinstance(p, Mapping):
        raise ConfigError("pipeline section must be an object")
    try:
        sorter_cfg = p.get("sorter", {})
        sorter = SorterConvention(
            odd_swaps=bool(sorter_cfg.get("odd_swaps", True)),
            swap_phase=complex(sorter_cfg.get("swap_phase", 1.0)),
        )
        cmp_raw = p.get("cmp", "default")
        if cmp_raw == "default":
            kwargs: dict[str, Any] = {}
        elif cmp_raw is None:
            kwargs = {"cmp_ket": None}
        else:
            kwargs = {"cmp_ket": {int(k): complex(v) for k, v in cmp_raw.items()}}
        elements_raw = p.get("elements")
        if elements_raw is not None:
            kwargs["elements_override"] = tuple(ElementSpec.from_dict(e) for e in elements_raw)
        return PipelineConfig(
            source1=_source_from(p.get("source1")),
            source2=_source_from(p.get("source2", p.get("source1"))),
            mirrors=dict(p.get("mirrors", DEFAULT_MIRRORS)),
            sorter=sorter,
            overlap=float(p.get("overlap", 1.0)),
            include_c2=bool(p.get("include_c2", False)),
            **kwargs,
        )
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid pipeline config: {exc}") from exc


def spectral_model_from(cfg: Mapping[str, Any]) -> spectral.SpectralModel:
    s = cfg.get("spectral", {})
    base = spectral.SpectralModel.reference_defaults()
    try:
        return spectral.SpectralModel(
            sigma_f=float(s.get("sigma_f_hz", base.sigma_f)),
            sigma_p=float(s.get("sigma_p_hz", base.sigma_p)),
            crystal_length=float(s.get("crystal_length_m", base.crystal_length)),
            delta_inv_gv=float(s.get("delta_inv_gv_s_per_m", base.delta_inv_gv)),
            lambda_c=float(s.get("lambda_c_m", base.lambda_c)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid spectral config: {exc}") from exc


def noise_params_from(cfg: Mapping[str, Any]) -> tomography.NoiseParams:
    n = cfg.get("noise", {})
    base = tomography.NoiseParams.table1()
    try:
        weights = n.get("weights", base.weights)
        return tomography.NoiseParams(
            p=float(n.get("p", base.p)),
            c=float(n.get("c", base.c)),
            weights=tuple(float(w) for w in weights),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid noise config: {exc}") from exc


# --- subcommands -------------------------------------------------------------


def cmd_simulate(cfg: dict, out: Path, seed: int) -> int:
    pipeline = pipeline_config_from(cfg)
    result = run_pipeline(pipeline)
    report: dict[str, Any] = {
        "seed": seed,
        "success_probability": result.probability,
        "num_terms": result.bcd_state.num_terms,
    }
    dump_json(state_to_dict(result.bcd_state), out / "state.json")
    if result.relabel is not None:
        vec = logical_state_vector(result.bcd_state, result.relabel, pipeline.ghz_paths)
        ghz, _ = tomography.ideal_ghz()
        report["fidelity_vs_ghz"] = float(abs(ghz.conj() @ vec) ** 2)
        report["srv"] = list(tomography.srv(vec))
        report["relabel"] = result.relabel.to_dict()
    else:
        report["fidelity_vs_ghz"] = None
        report["srv"] = None
        report["relabel"] = None
    if result.a_state is not None and result.four_photon_state is not None:
        report["factorized"] = factorization_check(
            result.four_photon_state, result.a_state, result.bcd_state
        )
    else:
        report["factorized"] = False
    cls = classify_terms(pipeline)
    report["term_classification"] = {
        f"{k1}|{k2}": {
            "verdict": r.verdict,
            "hom_involved": r.hom_involved,
            "cmp_blocked": r.cmp_blocked,
            "probability": r.probability,
        }
        for (k1, k2), r in sorted(cls.combos.items())
    }
    amps = sorted(
        (abs(t.amplitude) for t in result.bcd_state.terms), reverse=True
    )
    if len(amps) == 3 and amps[-1] > 0:
        report["amplitude_ratio_even_over_odd"] = amps[0] / amps[-1]
    dump_json(report, out / "report.json")
    return 0


def cmd_hom(cfg: dict, out: Path, x_min: float, x_max: float, x_steps: int) -> int:
    model = spectral_model_from(cfg)
    dip_cfg = cfg.get("spectral", {}).get("dip", {})
    vis = dip_cfg.get("visibility")
    if vis is None:
        vis = spectral.visibility(model.sigma_f, model.sigma_gvm)
    try:
        dip = spectral.DipModel(
            baseline=float(dip_cfg.get("baseline_cps", 1.0)),
            visibility=float(vis),
            width=float(dip_cfg.get("width_m", 800e-6)),
            center=float(dip_cfg.get("center_m", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid dip config: {exc}") from exc
    if x_steps < 2:
        raise ConfigError("--x-steps must be at least 2")
    xs = np.linspace(x_min, x_max, x_steps)
    rows = spectral.dip_curve(dip, xs)
    lines = [
        f"# four-fold dip model: baseline={dip.baseline:.12g} counts/s,"
        f" visibility={dip.visibility:.12g}, width={dip.width:.12g} m, center={dip.center:.12g} m",
        f"# spectral: sigma_f={model.sigma_f:.12g} Hz, sigma_gvm={model.sigma_gvm:.12g} Hz",
        "x_m,rate",
    ]
    lines += [f"{x:.12g},{r:.12g}" for x, r in rows]
    (out / "dip.csv").write_text("\n".join(lines) + "\n")
    return 0


def cmd_witness(cfg: dict, out: Path, seed: int, events: int) -> int:
    if events <= 0:
        raise ConfigError("--events must be positive")
    noise = noise_params_from(cfg)
    rho = tomography.noise_model(noise)
    plan = tomography.build_witness_plan()
    records = tomography.simulate_counts(rho, plan, events, seed=seed)
    f_est, sigma_f = tomography.estimate_fidelity(records, seed=seed + 1)
    ghz, _ = tomography.ideal_ghz()
    f_max = tomography.witness_bound(ghz)
    dump_json(
        {
            "F": f_est,
            "sigma_F": sigma_f,
            "F_max": f_max,
            "pass": bool(f_est > f_max),
            "events": events,
            "n_settings": len(plan),
            "seed": seed,
        },
        out / "witness.json",
    )
    lines = ["projB,projC,projD,counts,duration_s"]
    lines += [
        f"{r.descriptors[0]},{r.descriptors[1]},{r.descriptors[2]},{r.counts:.12g},{r.duration:.12g}"
        for r in records
    ]
    (out / "elements.csv").write_text("\n".join(lines) + "\n")
    return 0


def cmd_mermin(cfg: dict, out: Path) -> int:
    noise = noise_params_from(cfg)
    ops = contradiction.build_operators()
    operator = contradiction.mermin_operator(ops)
    _, rho_ghz = tomography.ideal_ghz()
    quantum = contradiction.quantum_expectation(operator, rho_ghz)
    enum = contradiction.lr_enumerate()
    dump_json(
        {
            "quantum_value": quantum.real,
            "lr_max_modulus": enum.max_modulus,
            "lr_max_real": enum.max_real,
            "distinct_value_count": len(enum.distinct_values),
            "distinct_values": [{"a": z.a, "b": z.b} for z in enum.distinct_values],
            "noise_expectation": contradiction.noise_expectation(noise),
            "branch": ops.branch,
        },
        out / "mermin.json",
    )
    return 0


def cmd_counts(cfg: dict, out: Path) -> int:
    try:
        rep_rate = float(cfg["rep_rate_hz"])
        tau = float(cfg["tau_int_s"])
        eta = float(cfg["eta"])
        singles = {k: float(v) for k, v in cfg["singles"].items()}
        pairs = {k: float(v) for k, v in cfg["pairs"].items()}
        model = counts_mod.RateModel(
            rep_rate=rep_rate,
            tau_int=tau,
            eta=eta,
            pair_rate=float(cfg.get("pair_rate_hz", 0.0)),
            singles=singles,
            pairs=pairs,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid rate file: {exc}") from exc
    missing = [k for k in counts_mod.PAIR_KEYS if k not in pairs]
    if missing:
        raise ConfigError(f"rate file lacks detector pairs: {missing}")
    missing_s = [k for k in counts_mod.DETECTORS if k not in singles]
    if missing_s:
        raise ConfigError(f"rate file lacks singles for detectors: {missing_s}")

    pulses = rep_rate * tau
    p_pair = {k: pairs[k] / pulses for k in counts_mod.PAIR_KEYS}
    p4 = counts_mod.fourfold_probability(
        p_pair["AB"], p_pair["CD"], p_pair["AC"], p_pair["BD"], p_pair["AD"], p_pair["BC"]
    )
    acc_rate = {
        k: counts_mod.accidental_pair(singles[k[0]], singles[k[1]], tau, rep_rate)
        for k in counts_mod.PAIR_KEYS
    }
    acc_prob = {k: acc_rate[k] / rep_rate for k in counts_mod.PAIR_KEYS}
    acc4 = counts_mod.accidental_fourfold(acc_prob, p_pair) * pulses
    p4_counts = p4 * pulses
    report = {
        "p4_probability_per_pulse": p4,
        "p4_predicted": p4_counts,
        "acc_pairs": acc_rate,
        "acc_pairs_per_window": {k: v * tau for k, v in acc_rate.items()},
        "acc_fourfold": acc4,
        "corrected": counts_mod.subtract(p4_counts, acc4),
        "mu": counts_mod.mean_photon_number(model.pair_rate, eta, rep_rate)
        if model.pair_rate
        else None,
        "higher_order_ratio": counts_mod.higher_order_ratio(
            counts_mod.mean_photon_number(model.pair_rate, eta, rep_rate), eta
        )
        if model.pair_rate
        else None,
    }
    dump_json(report, out / "counts.json")
    return 0


# --- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghz3d",
        description="Three-photon, three-dimensional GHZ experiment simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="JSON config path (defaults built in)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed")

    common(sub.add_parser("simulate", help="run the pipeline, write state.json and report.json"))

    hom = sub.add_parser("hom", help="write the four-fold dip curve dip.csv")
    common(hom)
    hom.add_argument("--x-min", type=float, default=-2e-3, help="scan start, m")
    hom.add_argument("--x-max", type=float, default=2e-3, help="scan end, m")
    hom.add_argument("--x-steps", type=int, default=81, help="number of samples")

    wit = sub.add_parser("witness", help="simulate the 219-setting witness run")
    common(wit)
    wit.add_argument("--events", type=int, default=1652, help="total expected four-fold events")

    common(sub.add_parser("mermin", help="write mermin.json with quantum and LR values"))
    common(sub.add_parser("counts", help="coincidence arithmetic from a rate file (--config)"))
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            return cmd_simulate(cfg, out, args.seed)
        if args.command == "hom":
            return cmd_hom(cfg, out, args.x_min, args.x_max, args.x_steps)
        if args.command == "witness":
            return cmd_witness(cfg, out, args.seed, args.events)
        if args.command == "mermin":
            return cmd_mermin(cfg, out)
        if args.command == "counts":
            return cmd_counts(cfg, out)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
