"""JSON artifact formats for matrices, bases, observable sets, and reports."""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from . import __version__
from .channels import KrausChannel
from .observables import AmbientSpace, InteractiveObservable, ObservableSet
from .subspaces import SubspaceBasis, SubspaceKind


def matrix_to_json(m: np.ndarray) -> dict:
    """Row-major complex matrix as {"rows", "cols", "entries": [[re, im], ...]}."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    entries = [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "entries": entries}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols, entries = obj["rows"], obj["cols"], obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix object: missing field {exc}") from exc
    if len(entries) != rows * cols:
        raise ValueError(
            f"matrix claims {rows}x{cols} but carries {len(entries)} entries"
        )
    flat = np.array([complex(re, im) for re, im in entries])
    return flat.reshape(rows, cols)


def basis_to_json(basis: SubspaceBasis) -> dict:
    return {
        "version": __version__,
        "kind": basis.kind.tag,
        "d": basis.kind.d,
        "q": basis.kind.q,
        "seed": basis.seed,
        "dim": basis.claimed_dim,
        "elements": [matrix_to_json(h) for h in basis.elements],
    }


def basis_from_json(obj: dict) -> SubspaceBasis:
    kind = SubspaceKind(obj["kind"], int(obj["d"]), int(obj["q"]))
    elements = tuple(matrix_from_json(e) for e in obj["elements"])
    return SubspaceBasis(kind, elements, int(obj["dim"]), int(obj["seed"]))


def observable_set_to_json(obs_set: ObservableSet) -> dict:
    return {
        "version": __version__,
        "d": obs_set.d,
        "q": obs_set.q,
        "question": obs_set.question,
        "count": len(obs_set),
        "seed": obs_set.seed,
        "ambient": obs_set.ambient.tag,
        "observables": [
            {
                "H": matrix_to_json(o.h),
                "scale": float(o.scale),
                "P_plus": matrix_to_json(o.decomposition.p_plus),
                "P_minus": matrix_to_json(o.decomposition.p_minus),
            }
            for o in obs_set.observables
        ],
    }


def observable_set_from_json(obj: dict) -> ObservableSet:
    observables = []
    for rec in obj["observables"]:
        h = matrix_from_json(rec["H"])
        observables.append(InteractiveObservable.from_hermitian(h))
    return ObservableSet(
        observables=tuple(observables),
        d=int(obj["d"]),
        q=int(obj["q"]),
        question=obj["question"],
        seed=int(obj["seed"]),
        ambient=AmbientSpace(obj["ambient"], int(obj["d"])),
        subspace=None,
    )


def channel_to_json(ch: KrausChannel) -> dict:
    return {
        "d": ch.d_in,
        "kraus": [matrix_to_json(a) for a in ch.kraus_ops],
    }


def channel_from_json(obj: dict) -> KrausChannel:
    return KrausChannel(tuple(matrix_from_json(a) for a in obj["kraus"]))


def report_to_json(report) -> dict:
    """Experiment report with full config echo for provenance."""
    cfg = report.config
    return {
        "version": __version__,
        "config": {
            "mode": cfg.mode,
            "d": cfg.d,
            "q": cfg.q,
            "question": cfg.question,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "shots": cfg.shots,
            "tol": cfg.tol,
            "pair_type": cfg.pair_type,
            "restarts": cfg.restarts,
        },
        "outcomes": list(report.outcomes),
        "success_rate": report.success_rate,
        "wall_clock_s": report.wall_clock_s,
        "errors": list(report.errors),
    }


def report_to_csv(report) -> str:
    """Per-trial CSV summary of an experiment report."""
    buf = io.StringIO()
    keys: list = []
    for o in report.outcomes:
        for k in o:
            if k not in keys:
                keys.append(k)
    writer = csv.DictWriter(buf, fieldnames=keys or ["trial"])
    writer.writeheader()
    for o in report.outcomes:
        writer.writerow(o)
    return buf.getvalue()


def dump(obj: dict, path: str) -> None:
    """Write a JSON artifact deterministically (sorted keys, fixed layout)."""
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
