"""Output files: embeddings as TSV, JSON sidecars, checksums."""

import hashlib
import json

import numpy as np

from .exceptions import ParseError


def write_matrix_tsv(path, node_ids, matrix):
    """One row per node: ``node_id<TAB>v1<TAB>...<TAB>vk`` with 17 significant digits."""
    matrix = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for node, row in zip(node_ids, matrix):
            fh.write(node + "\t" + "\t".join(f"{v:.17g}" for v in row) + "\n")


def read_matrix_tsv(path):
    node_ids, rows = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            try:
                rows.append([float(v) for v in parts[1:]])
            except ValueError:
                raise ParseError("non-numeric embedding value", lineno) from None
            node_ids.append(parts[0])
    if len({len(r) for r in rows}) > 1:
        raise ParseError("embedding rows have different lengths")
    return node_ids, np.array(rows, dtype=np.float64).reshape(len(rows), -1)


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
