"""Scenario execution, parameter sweeps and result records."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..continuum import (
    ContinuumProfile,
    Window,
    check_fast_condition,
    continuum_averaged_quadrature,
    continuum_mixed_closed_form,
    continuum_mixed_weak_value,
    countable_reduction,
    tailored_postselection,
)
from ..errors import InsufficientSamples, NumericalFailure
from ..oscillate import AveragingWindow, min_frequency_gap
from ..pointerlab import Estimator, PointerModel, monte_carlo
from ..strongeq import equivalence_trial, random_oscillating_state
from ..weakval import (
    SPIN,
    VERDICT_TOL,
    TwoStateConfig,
    VerdictKind,
    classify_value,
    discriminate,
    two_state_averaged,
    two_state_mixed,
)
from .config import AB_AXIS, SCHEMAS, Kind, ScenarioConfig, ValidationError, canonical_json, config_hash, sweepable_axes
from .presets import THERMAL, continuum_shape, preset_amplitudes

OUTPUT_DIR_ENV = "WEAKOSC_OUTPUT_DIR"
OUTPUT_COLUMNS = ("re_averaged", "im_averaged", "re_mixed", "im_mixed", "verdict")

INPUT_COLUMNS = {
    Kind.TWO_STATE: ("A", "B", "AB", "omega", "phi0", "nature"),
    Kind.COUNTABLE: ("source", "dim", "a_index", "b_index", "A_eff", "B", "AB", "chi", "omega0", "seed", "nature"),
    Kind.CONTINUUM: ("shape", "C1", "C2", "ratio", "Omega", "Phi", "delta_x", "delta_t", "a", "delta_a", "bins",
                     "shots", "seed", "nature"),
    Kind.POINTER_MC: ("A", "B", "AB", "omega", "phi0", "g", "sigma", "M", "L", "trials", "n_bins",
                      "window_start", "window_duration", "seed"),
    Kind.STRONG_EQUIVALENCE: ("state", "quantity", "dim", "min_gap", "cycles", "duration", "resolution", "seed"),
}


def software_version() -> str:
    from importlib.metadata import PackageNotFoundError, version

    try:
        return version("artifact")
    except PackageNotFoundError:
        from .. import __version__

        return __version__


@dataclass
class ResultRecord:
    config_hash: str
    timestamp: str
    software_version: str
    kind: Kind
    rows: list = field(default_factory=list)
    verdict: str | None = None
    metadata: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    @property
    def columns(self) -> tuple:
        return ("kind",) + INPUT_COLUMNS[self.kind] + OUTPUT_COLUMNS

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return _jsonable({
            "config_hash": self.config_hash,
            "timestamp": self.timestamp,
            "software_version": self.software_version,
            "kind": self.kind.value,
            "columns": list(self.columns),
            "rows": self.rows,
            "verdict": self.verdict,
            "metadata": self.metadata,
            "errors": self.errors,
        })


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, complex):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _outputs(averaged: complex, mixed: complex, verdict: str) -> dict:
    averaged, mixed = complex(averaged), complex(mixed)
    return {"re_averaged": averaged.real, "im_averaged": averaged.imag,
            "re_mixed": mixed.real, "im_mixed": mixed.imag, "verdict": verdict}


def _measured(p: dict, averaged: complex, mixed: complex) -> complex:
    return averaged if p.get("nature", "oscillating") == "oscillating" else mixed


def _two_state_rows(cfg: ScenarioConfig) -> list[dict]:
    p = cfg.parameters
    ts = TwoStateConfig(p["A"], p["B"], p["omega"], p["phi0"])
    averaged = two_state_averaged(ts, p["nodes"]).value
    mixed = two_state_mixed(ts).value
    m = _measured(p, averaged, mixed)
    row = {"kind": cfg.kind.value, "A": p["A"], "B": p["B"], "AB": ts.AB, "omega": p["omega"], "phi0": p["phi0"],
           "nature": p["nature"], "measured": m, "gap": averaged.real - mixed.real}
    row.update(_outputs(averaged, mixed, classify_value(ts.AB, m).value))
    return [row]


def _countable_amplitudes(cfg: ScenarioConfig) -> np.ndarray:
    p = cfg.parameters
    return preset_amplitudes(p["source"], p["dim"], p["source_params"], seed=cfg.seed)


def _countable_rows(cfg: ScenarioConfig) -> list[dict]:
    p = cfg.parameters
    amps = _countable_amplitudes(cfg)
    a_eff = float(abs(amps[p["b_index"]]) / abs(amps[p["a_index"]]))
    averaged, mixed = countable_reduction(amps, p["a_index"], p["b_index"], p["B"], p["chi"], p["omega0"], p["nodes"])
    averaged, mixed = averaged.value, mixed.value
    m = _measured(p, averaged, mixed)
    ab = a_eff * p["B"]
    row = {"kind": cfg.kind.value, "source": p["source"], "dim": p["dim"], "a_index": p["a_index"],
           "b_index": p["b_index"], "A_eff": a_eff, "B": p["B"], "AB": ab, "chi": p["chi"], "omega0": p["omega0"],
           "seed": cfg.seed, "nature": p["nature"], "measured": m, "gap": averaged.real - mixed.real}
    row.update(_outputs(averaged, mixed, classify_value(ab, m).value))
    return [row]


def recover_profile(truth: ContinuumProfile, shots: int, seed: int) -> tuple[ContinuumProfile, dict]:
    """Simulated non-post-selected position measurement: bin counts from ``shots`` detections."""
    prob = truth.amplitude ** 2 * truth.h
    prob = prob / prob.sum()
    counts = np.random.default_rng(seed).multinomial(shots, prob)
    recovered = ContinuumProfile.from_bin_probabilities(truth.grid, counts, truth.Omega, truth.Phi,
                                                        truth.delta_x, truth.delta_t)
    expected = shots * prob
    live = expected >= 10
    z = (counts[live] - expected[live]) / np.sqrt(expected[live] * (1 - prob[live]))
    stats = {"shots": shots, "bins_checked": int(live.sum()),
             "max_abs_z": float(np.max(np.abs(z))) if z.size else math.nan,
             "chi2_per_bin": float(np.mean(z * z)) if z.size else math.nan}
    return recovered, stats


def continuum_truth(cfg: ScenarioConfig) -> ContinuumProfile:
    p = cfg.parameters
    fn = continuum_shape(p["shape"], p["shape_params"])
    return ContinuumProfile.from_function(fn, p["lo"], p["hi"], p["bins"], p["Omega"], p["Phi"],
                                          p["delta_x"], p["delta_t"])


def _continuum_rows(cfg: ScenarioConfig, meta: dict) -> list[dict]:
    p = cfg.parameters
    truth = continuum_truth(cfg)
    recovered, stats = recover_profile(truth, p["shots"], cfg.seed)
    post = tailored_postselection(recovered, Window(p["a"], p["delta_a"]), p["C1"], p["C2"])
    averaged = continuum_averaged_quadrature(truth, post, cfg.averaging["start"], p["nodes"])
    mixed = continuum_mixed_weak_value(truth, post).value
    fast = check_fast_condition(truth)
    meta["amplitude_recovery"] = stats
    meta["fast_condition"] = {"cycles": fast.cycles_in_window, "is_fast": fast.is_fast}
    m = _measured(p, averaged, mixed)
    r = p["C2"] / p["C1"]
    row = {"kind": cfg.kind.value, "shape": p["shape"], "C1": p["C1"], "C2": p["C2"], "ratio": r,
           "Omega": p["Omega"], "Phi": p["Phi"], "delta_x": p["delta_x"], "delta_t": p["delta_t"], "a": p["a"],
           "delta_a": p["delta_a"], "bins": p["bins"], "shots": p["shots"], "seed": cfg.seed,
           "nature": p["nature"], "measured": m, "gap": averaged.real - mixed.real,
           "ideal_mixed": continuum_mixed_closed_form(p["C1"], p["C2"]), "fast": fast.is_fast}
    row.update(_outputs(averaged, mixed, classify_value(r, m).value))
    return [row]


def _pointer_rows(cfg: ScenarioConfig, workers: int) -> list[dict]:
    p = cfg.parameters
    ts = TwoStateConfig(p["A"], p["B"], p["omega"], p["phi0"])
    start = cfg.averaging["start"]
    duration = cfg.averaging.get("duration", ts.period())
    window = AveragingWindow(start, duration, cfg.averaging["nodes"])
    pm = PointerModel(p["M"], p["L"], p["sigma"], p["g"])
    args = (ts.oscillating_state(), SPIN, ts.post_state(), pm, window, p["trials"], cfg.seed)
    binned = monte_carlo(*args, estimator=Estimator.TIME_BINNED, n_bins=p["n_bins"], workers=workers)
    pooled = monte_carlo(*args, estimator=Estimator.POOLED, workers=workers)
    se = max(binned.stderr_re, binned.stderr_im)
    verdict = classify_value(ts.AB, binned.value, VERDICT_TOL + 3 * se).value
    row = {"kind": cfg.kind.value, "A": p["A"], "B": p["B"], "AB": ts.AB, "omega": p["omega"], "phi0": p["phi0"],
           "g": p["g"], "sigma": p["sigma"], "M": p["M"], "L": p["L"], "trials": p["trials"],
           "n_bins": p["n_bins"], "window_start": start, "window_duration": duration, "seed": cfg.seed,
           "measured": binned.value, "survivors": pooled.survivors,
           "stderr_averaged": [binned.stderr_re, binned.stderr_im],
           "stderr_mixed": [pooled.stderr_re, pooled.stderr_im], "notes": list(binned.notes)}
    row.update(_outputs(binned.value, pooled.value, verdict))
    return [row]


def _strong_rows(cfg: ScenarioConfig) -> list[dict]:
    p = cfg.parameters
    rows = []
    for k, child in enumerate(np.random.SeedSequence(cfg.seed).spawn(p["states"])):
        rng = np.random.default_rng(child)
        s = random_oscillating_state(rng, p["dim"], p["base_gap"])
        gap = float(min_frequency_gap(s))
        duration = 2 * math.pi * p["cycles"] / gap
        window = AveragingWindow(cfg.averaging["start"], duration, cfg.averaging["nodes"])
        for rep in equivalence_trial(s, window, rng, k, p["resolution"]):
            row = {"kind": cfg.kind.value, "state": k, "quantity": rep.quantity.value, "dim": p["dim"],
                   "min_gap": gap, "cycles": p["cycles"], "duration": duration, "resolution": p["resolution"],
                   "seed": cfg.seed, "deviation": rep.deviation, "bound": rep.bound}
            row.update(_outputs(rep.oscillating_value, rep.mixed_value,
                                "Indistinguishable" if rep.passed else "Distinguishable"))
            rows.append(row)
    return rows


def _execute(cfg: ScenarioConfig, workers: int = 1) -> tuple[list[dict], dict]:
    meta: dict = {}
    if cfg.kind is Kind.TWO_STATE:
        rows = _two_state_rows(cfg)
    elif cfg.kind is Kind.COUNTABLE:
        rows = _countable_rows(cfg)
        if cfg.parameters["source"] != "custom":
            meta["source_label"] = "illustrative"
            meta["amplitude_law"] = ("thermal Boltzmann" if cfg.parameters["source"] in THERMAL
                                     else cfg.parameters["source"])
    elif cfg.kind is Kind.CONTINUUM:
        rows = _continuum_rows(cfg, meta)
    elif cfg.kind is Kind.POINTER_MC:
        rows = _pointer_rows(cfg, workers)
    else:
        rows = _strong_rows(cfg)
    return rows, meta


def _error_row(cfg: ScenarioConfig, exc: Exception) -> dict:
    p = cfg.parameters
    row = {"kind": cfg.kind.value, "seed": cfg.seed, "error": f"{type(exc).__name__}: {exc}"}
    row.update({c: p[c] for c in INPUT_COLUMNS[cfg.kind] if c in p})
    row.update(_outputs(complex(math.nan, math.nan), complex(math.nan, math.nan), "Error"))
    return row


def _point(cfg: ScenarioConfig, workers: int):
    try:
        rows, meta = _execute(cfg, workers)
        return rows, meta, None
    except (NumericalFailure, ArithmeticError) as exc:
        return [_error_row(cfg, exc)], {}, exc


def _new_record(cfg: ScenarioConfig) -> ResultRecord:
    now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    return ResultRecord(config_hash(cfg), now, software_version(), cfg.kind,
                        metadata={"config": cfg.to_dict()})


def _sweep_verdict(kind: Kind, rows: list[dict]) -> tuple[str, str | None]:
    if kind is Kind.STRONG_EQUIVALENCE:
        ok = all(r["verdict"] == "Indistinguishable" for r in rows)
        return ("Indistinguishable" if ok else "Distinguishable"), None
    good = [r for r in rows if r["verdict"] != "Error"]
    if kind is Kind.CONTINUUM:
        samples = [(1.0, r["ratio"], r["measured"]) for r in good]
    elif kind is Kind.COUNTABLE:
        samples = [(r["A_eff"], r["B"], r["measured"]) for r in good]
    else:
        samples = [(r["A"], r["B"], r["measured"]) for r in good]
    try:
        return discriminate(samples).kind.value, None
    except InsufficientSamples as exc:
        return VerdictKind.INCONCLUSIVE.value, str(exc)


def run(cfg: ScenarioConfig, workers: int = 1) -> ResultRecord:
    """Execute one scenario. Numerical failures are recorded in ``errors`` rather than raised."""
    rec = _new_record(cfg)
    rows, meta, exc = _point(cfg, workers)
    rec.rows = rows
    rec.metadata.update(meta)
    if exc is not None:
        rec.errors.append({"type": type(exc).__name__, "message": str(exc)})
        rec.verdict = "Error"
    elif cfg.kind is Kind.STRONG_EQUIVALENCE:
        rec.verdict = _sweep_verdict(cfg.kind, rows)[0]
    else:
        rec.verdict = rows[0]["verdict"]
    return rec


def apply_axis(cfg: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    p = dict(cfg.parameters)
    if axis == AB_AXIS:
        if cfg.kind in (Kind.TWO_STATE, Kind.POINTER_MC):
            p["A"] = value / p["B"]
        elif cfg.kind is Kind.COUNTABLE:
            amps = _countable_amplitudes(cfg)
            p["B"] = value * abs(amps[p["a_index"]]) / abs(amps[p["b_index"]])
        else:
            p["C2"] = value * p["C1"]
    else:
        p[axis] = int(value) if SCHEMAS[cfg.kind][axis].type == "int" else value
    return cfg.replace(parameters=p)


def sweep_configs(cfg: ScenarioConfig, axis: str, values) -> list[ScenarioConfig]:
    """One validated config per value; every invalid value is reported."""
    values = list(values)
    if not values:
        raise ValidationError([("values", "sweep needs at least one value")])
    axes = sweepable_axes(cfg.kind)
    if axis not in axes:
        raise ValidationError([("axis", f"{axis!r} is not sweepable for {cfg.kind.value}; "
                                         f"choose from {', '.join(axes)}")])
    out, problems = [], []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            problems.append((f"values[{i}]", f"{v!r} is not a finite number"))
            continue
        try:
            out.append(apply_axis(cfg, axis, float(v)))
        except ValidationError as exc:
            problems.extend((f"values[{i}] -> {path}", msg) for path, msg in exc.problems)
    if problems:
        raise ValidationError(problems)
    return out


def sweep(cfg: ScenarioConfig, axis: str, values, workers: int = 1) -> ResultRecord:
    """Run one scenario per value, concurrently; rows keep the input order."""
    configs = sweep_configs(cfg, axis, values)
    rec = _new_record(cfg)
    rec.metadata["sweep"] = {"axis": axis, "values": [float(v) for v in values]}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda c: _point(c, 1), configs))
    else:
        results = [_point(c, 1) for c in configs]
    for i, (rows, meta, exc) in enumerate(results):
        rec.rows.extend(rows)
        if meta:
            rec.metadata.setdefault("points", {})[str(i)] = meta
        if exc is not None:
            rec.errors.append({"index": i, "type": type(exc).__name__, "message": str(exc)})
    rec.verdict, note = _sweep_verdict(cfg.kind, rec.rows)
    if note:
        rec.metadata["verdict_note"] = note
    if cfg.kind is Kind.COUNTABLE and cfg.parameters["source"] != "custom":
        rec.metadata["source_label"] = "illustrative"
    return rec


def output_stem(cfg: ScenarioConfig, override: str | None = None) -> Path:
    """Explicit override, else the env-var directory plus the config's file name, else output_path."""
    if override:
        path = Path(override)
    elif os.environ.get(OUTPUT_DIR_ENV):
        path = Path(os.environ[OUTPUT_DIR_ENV]) / Path(cfg.output_path).name
    else:
        path = Path(cfg.output_path)
    return path.with_suffix("") if path.suffix in (".csv", ".json") else path


def write_record(rec: ResultRecord, stem: Path) -> tuple[Path, Path]:
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = stem.with_name(stem.name + ".csv"), stem.with_name(stem.name + ".json")
    csv_path.write_text(rec.csv_text(), encoding="utf-8")
    json_path.write_text(json.dumps(rec.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return csv_path, json_path


__all__ = ["ResultRecord", "run", "sweep", "sweep_configs", "apply_axis", "output_stem", "write_record",
           "recover_profile", "continuum_truth", "canonical_json", "OUTPUT_DIR_ENV"]
