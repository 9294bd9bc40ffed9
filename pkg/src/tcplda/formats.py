"""Text file formats: embeddings, models, trial lists and plain matrices.

Embeddings (``PLDA-TXT 1 <d>``)::

    PLDA-TXT 1 2
    spk1<TAB>0.5 -1.25
    spk1<TAB>0.25 0.0

Models (``PLDA-MODEL 1 <d>``): the header, one line with ``mu``, ``d`` rows of
``phi_b`` then ``d`` rows of ``phi_w``. Floats are written with 17
significant digits so that every float64 survives a round trip.

Trials: ``<enroll_id><TAB><test_index>`` per line, where ``test_index`` is
the 0-based row of the test embedding file.
"""
from __future__ import annotations

import numpy as np

from tcplda.em import PldaModel
from tcplda.errors import FormatError
from tcplda.stats import LabeledDataset

EMBEDDING_MAGIC = "PLDA-TXT"
MODEL_MAGIC = "PLDA-MODEL"
FORMAT_VERSION = "1"


def fmt_float(x):
    return f"{float(x):.17g}"


def _fmt_row(values):
    return " ".join(fmt_float(v) for v in values)


def _parse_floats(text, expected, lineno):
    parts = text.split()
    if len(parts) != expected:
        raise FormatError(f"expected {expected} values, found {len(parts)}", lineno)
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise FormatError(f"bad number ({exc})", lineno) from None


def _parse_header(line, magic, lineno=1):
    parts = line.split()
    if len(parts) != 3 or parts[0] != magic:
        raise FormatError(f"expected header '{magic} {FORMAT_VERSION} <dim>', got {line.strip()!r}", lineno)
    if parts[1] != FORMAT_VERSION:
        raise FormatError(f"unsupported {magic} version {parts[1]!r} (this reader handles {FORMAT_VERSION})", lineno)
    try:
        dim = int(parts[2])
    except ValueError:
        raise FormatError(f"bad dimension {parts[2]!r}", lineno) from None
    if dim < 1:
        raise FormatError(f"dimension must be >= 1, got {dim}", lineno)
    return dim


def format_embeddings(data: LabeledDataset) -> str:
    lines = [f"{EMBEDDING_MAGIC} {FORMAT_VERSION} {data.dim}"]
    for label, vec in zip(data.labels, data.vectors):
        if "\t" in label or "\n" in label:
            raise FormatError(f"class id {label!r} contains a tab or newline")
        lines.append(f"{label}\t{_fmt_row(vec)}")
    return "\n".join(lines) + "\n"


def parse_embeddings(text: str) -> LabeledDataset:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty embedding file", 1)
    dim = _parse_header(lines[0], EMBEDDING_MAGIC)
    labels, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        label, sep, values = line.partition("\t")
        if not sep or not label:
            raise FormatError("expected '<class_id><TAB><values>'", lineno)
        labels.append(label)
        rows.append(_parse_floats(values, dim, lineno))
    if not rows:
        raise FormatError("embedding file has no records")
    return LabeledDataset(tuple(labels), np.array(rows, dtype=np.float64))


def read_embeddings(path) -> LabeledDataset:
    with open(path, encoding="utf-8") as fh:
        return parse_embeddings(fh.read())


def write_embeddings(path, data: LabeledDataset):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_embeddings(data))


def format_model(model: PldaModel) -> str:
    lines = [f"{MODEL_MAGIC} {FORMAT_VERSION} {model.dim}", _fmt_row(model.mu)]
    lines += [_fmt_row(row) for row in model.phi_b]
    lines += [_fmt_row(row) for row in model.phi_w]
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> PldaModel:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty model file", 1)
    d = _parse_header(lines[0], MODEL_MAGIC)
    if len(lines) < 2 + 2 * d:
        raise FormatError(f"model of dim {d} needs {2 + 2 * d} lines, found {len(lines)}")
    if any(line.strip() for line in lines[2 + 2 * d:]):
        raise FormatError("trailing content after phi_w", 3 + 2 * d)
    mu = _parse_floats(lines[1], d, 2)
    phi_b = [_parse_floats(lines[2 + i], d, 3 + i) for i in range(d)]
    phi_w = [_parse_floats(lines[2 + d + i], d, 3 + d + i) for i in range(d)]
    return PldaModel(np.array(mu), np.array(phi_b), np.array(phi_w)).validate()


def read_model(path) -> PldaModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def write_model(path, model: PldaModel):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_model(model))


def read_trials(path):
    """List of ``(lineno, enroll_id, test_index)``."""
    trials = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            enroll_id, sep, index = line.partition("\t")
            if not sep or not enroll_id:
                raise FormatError("expected '<enroll_id><TAB><test_index>'", lineno)
            try:
                idx = int(index.strip())
            except ValueError:
                raise FormatError(f"bad test index {index!r}", lineno) from None
            trials.append((lineno, enroll_id, idx))
    return trials


def read_matrix(path, dim=None):
    """Whitespace-separated square matrix, one row per line."""
    with open(path, encoding="utf-8") as fh:
        lines = [(n, line) for n, line in enumerate(fh, start=1) if line.strip()]
    if not lines:
        raise FormatError(f"{path}: empty matrix file")
    d = len(lines[0][1].split()) if dim is None else dim
    if len(lines) != d:
        raise FormatError(f"{path}: expected {d} rows, found {len(lines)}")
    return np.array([_parse_floats(line, d, n) for n, line in lines])


def write_report(path, report):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, rec in enumerate(report.iterations, start=1):
            fh.write(f"{i}\t{fmt_float(rec.log_likelihood)}\n")
