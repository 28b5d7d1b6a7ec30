"""File formats: matrices, distributions, topologies, tomography data.

All JSON schemas carry a ``schema_version`` field and are written with
sorted keys so identical inputs produce byte-identical files. Matrices are
stored as explicit real/imaginary arrays to avoid complex-literal and locale
ambiguity. Distribution CSV columns are ``outcome,probability`` with the
outcome written as a digit string (one digit per mode).
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
from pathlib import Path

import numpy as np

from .exceptions import DimensionError
from .lossy import BeamSplitterElement, CircuitTopology
from .sampling import OutcomeDistribution, SampleRecord
from .tomography import OnePhotonData, TwoPhotonData, VisibilityRecord
from .validation import as_complex_matrix

SCHEMA_VERSION = 1

ONE_PHOTON_HEADER = ["input_i", "output_j", "frequency", "variance"]
TWO_PHOTON_HEADER = ["i1", "i2", "j1", "j2", "visibility", "variance"]


def _dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DimensionError(f"malformed JSON in {path}: {exc}") from exc


def occupation_to_string(occ) -> str:
    if any(c > 9 for c in occ):
        raise DimensionError("digit-string occupations support counts <= 9")
    return "".join(str(c) for c in occ)


def occupation_from_string(text: str) -> tuple:
    if not text.isdigit():
        raise DimensionError(f"occupation string must be digits: {text!r}")
    return tuple(int(c) for c in text)


def write_matrix(lam, path) -> None:
    lam = as_complex_matrix(lam)
    _dump_json({
        "schema_version": SCHEMA_VERSION,
        "m": lam.shape[0],
        "re": lam.real.tolist(),
        "im": lam.imag.tolist(),
    }, path)


def read_matrix(path) -> np.ndarray:
    data = _load_json(path)
    try:
        m = int(data["m"])
        lam = np.array(data["re"], float) + 1j * np.array(data["im"], float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionError(f"malformed matrix file {path}: {exc}") from exc
    if lam.shape != (m, m):
        raise DimensionError(
            f"matrix file {path}: arrays have shape {lam.shape}, expected "
            f"({m}, {m})"
        )
    return lam


def matrix_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def distribution_to_csv(dist: OutcomeDistribution, path=None) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["outcome", "probability"])
    for occ, p in zip(dist.outcomes, dist.probs):
        writer.writerow([occupation_to_string(occ), repr(float(p))])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def distribution_from_csv(path) -> OutcomeDistribution:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["outcome", "probability"]:
            raise DimensionError(f"unexpected distribution CSV header: {header}")
        outcomes, probs = [], []
        for row in reader:
            outcomes.append(occupation_from_string(row[0]))
            probs.append(float(row[1]))
    return OutcomeDistribution(tuple(outcomes), np.array(probs))


def distribution_to_json(dist: OutcomeDistribution, path=None) -> str:
    return _dump_json({
        "schema_version": SCHEMA_VERSION,
        "outcomes": [occupation_to_string(o) for o in dist.outcomes],
        "probabilities": [float(p) for p in dist.probs],
    }, path)


def distribution_from_json(path) -> OutcomeDistribution:
    data = _load_json(path)
    outcomes = tuple(occupation_from_string(o) for o in data["outcomes"])
    return OutcomeDistribution(outcomes, np.array(data["probabilities"], float))


def sample_record_to_json(record: SampleRecord, path=None,
                          matrix_sha256: str | None = None) -> str:
    seed = record.seed
    if isinstance(seed, np.random.SeedSequence):
        seed = list(seed.entropy) if isinstance(seed.entropy, tuple) \
            else seed.entropy
    payload = {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "n_samples": record.total,
        "counts": {occupation_to_string(o): c
                   for o, c in sorted(record.counts.items(), reverse=True)},
    }
    if matrix_sha256 is not None:
        payload["matrix_sha256"] = matrix_sha256
    return _dump_json(payload, path)


def sample_record_from_json(path) -> SampleRecord:
    data = _load_json(path)
    counts = {occupation_from_string(k): int(v)
              for k, v in data["counts"].items()}
    return SampleRecord(counts, int(data["n_samples"]), data["seed"])


def topology_to_json(topo: CircuitTopology, path=None) -> str:
    return _dump_json({
        "schema_version": SCHEMA_VERSION,
        "modes": topo.modes,
        "accessible": list(topo.accessible),
        "elements": [
            {"a": e.mode_a, "b": e.mode_b, "r": e.reflectivity,
             "theta": e.phase}
            for e in topo.elements
        ],
    }, path)


def topology_from_json(path) -> CircuitTopology:
    data = _load_json(path)
    try:
        elements = tuple(
            BeamSplitterElement(int(e["a"]), int(e["b"]), float(e["r"]),
                                float(e.get("theta", 0.0)))
            for e in data["elements"]
        )
        return CircuitTopology(int(data["modes"]), elements,
                               tuple(data["accessible"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionError(f"malformed topology file {path}: {exc}") from exc


def one_photon_to_csv(data: OnePhotonData, path=None) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ONE_PHOTON_HEADER)
    m = data.freq.shape[0]
    for i in range(m):
        for j in range(data.freq.shape[1]):
            writer.writerow([i, j, repr(float(data.freq[i, j])),
                             repr(float(data.variance[i, j]))])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def one_photon_from_csv(path) -> OnePhotonData:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ONE_PHOTON_HEADER:
            raise DimensionError(f"unexpected one-photon CSV header: {header}")
        for row in reader:
            rows.append((int(row[0]), int(row[1]), float(row[2]),
                         float(row[3])))
    if not rows:
        raise DimensionError(f"one-photon file {path} has no records")
    m_in = max(r[0] for r in rows) + 1
    m_out = max(r[1] for r in rows) + 1
    freq = np.zeros((m_in, m_out))
    var = np.zeros((m_in, m_out))
    for i, j, f, v in rows:
        freq[i, j] = f
        var[i, j] = v
    return OnePhotonData(freq, var)


def two_photon_to_csv(data: TwoPhotonData, path=None) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TWO_PHOTON_HEADER)
    for r in data.records:
        writer.writerow([r.i1, r.i2, r.j1, r.j2, repr(float(r.visibility)),
                         repr(float(r.variance))])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def two_photon_from_csv(path) -> TwoPhotonData:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TWO_PHOTON_HEADER:
            raise DimensionError(f"unexpected two-photon CSV header: {header}")
        for row in reader:
            records.append(VisibilityRecord(
                int(row[0]), int(row[1]), int(row[2]), int(row[3]),
                float(row[4]), float(row[5]),
            ))
    return TwoPhotonData(tuple(records))


def phase_mask_from_json(path) -> np.ndarray:
    data = _load_json(path)
    return np.array(data["mask"], dtype=bool)


def reconstruction_to_json(tau, phases, residual, path=None) -> str:
    return _dump_json({
        "schema_version": SCHEMA_VERSION,
        "tau": np.asarray(tau, float).tolist(),
        "phi": np.asarray(phases, float).tolist(),
        "residual": float(residual),
        "gauge": "first row and first column phases fixed to 0",
    }, path)


def noise_params_from_json(path):
    from .noise import NoiseParams, PdcSource

    data = _load_json(path)
    try:
        sources = tuple(
            PdcSource(float(s["lambda2"]), tuple(s["modes"]))
            for s in data.get("sources", [])
        )
        return NoiseParams(
            sources=sources,
            alpha=float(data.get("alpha", 1.0)),
            dark_rate=float(data.get("dark_rate", 0.0)),
            postselect_n=int(data.get("postselect_N", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionError(f"malformed noise config {path}: {exc}") from exc
