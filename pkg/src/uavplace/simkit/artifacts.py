"""Artifact persistence: provenance-stamped CSVs and run manifests.

Writes are atomic (temp file + rename) and fully deterministic: floats are
serialized with repr (shortest round-trip form) and no timestamps or host
state are embedded, so a rerun with the same spec and seed produces
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from ..provenance import TOOL_VERSION, canonical_json, config_hash, to_jsonable

__all__ = ["format_cell", "write_csv", "write_manifest", "verify_artifact", "sha256_file"]


def format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (int, str)):
        return str(v)
    try:
        return repr(float(v))
    except (TypeError, ValueError):
        return str(v)


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_csv(path, columns: dict[str, list], spec_doc: dict, seed: int,
              length_unit: str = "unitless") -> str:
    """Write a provenance-stamped CSV; returns the embedded config hash.

    Layout: '#'-prefixed provenance comments, then a header row, then data.
    The config hash covers the canonical spec document, so a verifier can
    recompute it from the embedded spec line.
    """
    path = Path(path)
    digest = config_hash(spec_doc)
    names = list(columns)
    lengths = {len(v) for v in columns.values()}
    if len(lengths) > 1:
        raise ValueError("all CSV columns must have equal length")
    nrows = lengths.pop() if lengths else 0
    lines = [
        f"# tool: {TOOL_VERSION}",
        f"# config_hash: {digest}",
        f"# seed: {seed}",
        f"# length_unit: {length_unit}",
        f"# spec: {canonical_json(spec_doc)}",
        ",".join(names),
    ]
    for i in range(nrows):
        lines.append(",".join(format_cell(columns[name][i]) for name in names))
    _atomic_write(path, "\n".join(lines) + "\n")
    return digest


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, spec_doc: dict, seed: int, outputs: list[str],
                   status: str = "complete", error: str | None = None) -> Path:
    """Machine-readable run manifest listing artifact digests."""
    out_dir = Path(out_dir)
    manifest = {
        "tool": TOOL_VERSION,
        "config_hash": config_hash(spec_doc),
        "seed": seed,
        "spec": to_jsonable(spec_doc),
        "status": status,
        "outputs": [
            {"path": str(Path(p).name), "sha256": sha256_file(p)}
            for p in outputs
            if Path(p).exists()
        ],
    }
    if error:
        manifest["error"] = error
    path = out_dir / "run_manifest.json"
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def verify_artifact(csv_path) -> bool:
    """Recompute the config hash from the embedded spec and compare."""
    embedded_hash = None
    spec_doc = None
    with open(csv_path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            if line.startswith("# config_hash:"):
                embedded_hash = line.split(":", 1)[1].strip()
            elif line.startswith("# spec:"):
                spec_doc = json.loads(line.split(":", 1)[1].strip())
    if embedded_hash is None or spec_doc is None:
        return False
    return config_hash(spec_doc) == embedded_hash
