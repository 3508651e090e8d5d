"""Model artifact persistence.

An artifact is one file: a JSON header line describing the model kind,
dimensions, seed and run configuration, followed by the raw little-endian
bytes of each array named in the header. Factor models store U then V;
Zipf scorers store their popularity ranks; random scorers need no payload.
Round-trips are bit-exact.
"""

import json

import numpy as np

from .baselines import PopularityTable, RandomScorer, ZipfScorer
from .errors import DataError
from .model import FactorModel

FORMAT_NAME = "paretorank-model"
FORMAT_VERSION = 1


def _header_bytes(header: dict) -> bytes:
    return (json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def save_model(scorer, path, seed: int, config: dict | None = None):
    """Persist any supported scorer with its seed and config echoed."""
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n_users": scorer.n_users,
        "n_items": scorer.n_items,
        "seed": seed,
        "config": config or {},
    }
    arrays: list[np.ndarray] = []
    if isinstance(scorer, FactorModel):
        header["kind"] = "factors"
        header["d"] = scorer.n_factors
        header["arrays"] = [
            ["U", [scorer.n_users, scorer.n_factors], "<f8"],
            ["V", [scorer.n_items, scorer.n_factors], "<f8"],
        ]
        arrays = [scorer.U, scorer.V]
    elif isinstance(scorer, RandomScorer):
        header["kind"] = "random"
        header["arrays"] = []
    elif isinstance(scorer, ZipfScorer):
        header["kind"] = "zipf"
        header["arrays"] = [["counts", [scorer.n_items], "<i8"]]
        arrays = [scorer.popularity.counts]
    else:
        raise TypeError(f"cannot serialize scorer of type {type(scorer).__name__}")
    with open(path, "wb") as fp:
        fp.write(_header_bytes(header))
        for arr in arrays:
            fp.write(np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<")).tobytes())


def load_model(path):
    """Load an artifact; returns (scorer, header)."""
    with open(path, "rb") as fp:
        header_line = fp.readline()
        try:
            header = json.loads(header_line)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise DataError(f"{path}: not a model artifact ({exc})") from None
        if header.get("format") != FORMAT_NAME:
            raise DataError(f"{path}: unrecognized artifact format {header.get('format')!r}")
        arrays = {}
        for name, shape, dtype in header.get("arrays", []):
            n_bytes = int(np.prod(shape)) * np.dtype(dtype).itemsize
            buf = fp.read(n_bytes)
            if len(buf) != n_bytes:
                raise DataError(f"{path}: truncated artifact, array {name!r} incomplete")
            arrays[name] = np.frombuffer(buf, dtype=dtype).reshape(shape).copy()
    kind = header.get("kind")
    if kind == "factors":
        scorer = FactorModel(U=arrays["U"], V=arrays["V"])
    elif kind == "random":
        scorer = RandomScorer(header["n_users"], header["n_items"], header["seed"])
    elif kind == "zipf":
        scorer = ZipfScorer(PopularityTable(arrays["counts"]), header["n_users"])
    else:
        raise DataError(f"{path}: unknown model kind {kind!r}")
    return scorer, header
