"""Adapters to externally computed embeddings.

The trained sentence-embedding model is a black box to this pipeline; it
is reached either through a precomputed embedding file or a sidecar
process speaking a line-delimited JSON protocol on stdin/stdout.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from pathlib import Path

import numpy as np

from .embedding import unit
from .errors import AdapterUnavailable, DimensionMismatch, MissingEmbedding


def write_embedding_file(path: str | Path, domains: list[str], vectors: np.ndarray,
                         model: str) -> None:
    """Write the precomputed-embedding format: a header line with dim and
    model, then one record per domain."""
    vectors = np.asarray(vectors)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": int(vectors.shape[1]), "model": model},
                            separators=(",", ":")) + "\n")
        for domain, vec in zip(domains, vectors):
            record = {"domain": domain, "vec": [float(x) for x in vec]}
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")


class FileEmbedder:
    """Lookup adapter over a precomputed embedding file."""

    def __init__(self, path: str | Path):
        path = Path(path)
        if not path.exists():
            raise AdapterUnavailable(f"embedding file not found: {path}")
        self._table: dict[str, np.ndarray] = {}
        with open(path, encoding="utf-8") as fh:
            header_line = fh.readline()
            try:
                header = json.loads(header_line)
                self.dim = int(header["dim"])
                self.model_name = str(header.get("model", "unknown"))
            except (ValueError, KeyError, TypeError) as exc:
                raise AdapterUnavailable(f"bad embedding file header: {exc}") from exc
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                vec = np.asarray(record["vec"], dtype=np.float64)
                if vec.shape != (self.dim,):
                    raise DimensionMismatch(
                        f"record for {record['domain']!r} has dim {vec.shape[0]}, header says {self.dim}"
                    )
                self._table[record["domain"]] = unit(vec)

    def __len__(self) -> int:
        return len(self._table)

    def embed(self, fqdn: str) -> np.ndarray:
        try:
            return self._table[fqdn]
        except KeyError:
            raise MissingEmbedding(f"no precomputed embedding for {fqdn!r}") from None

    def embed_batch(self, fqdns: list[str]) -> np.ndarray:
        if not fqdns:
            return np.zeros((0, self.dim), dtype=np.float64)
        return np.stack([self.embed(f) for f in fqdns])


class SidecarEmbedder:
    """Adapter to a sidecar process embedding texts on demand.

    Protocol, one JSON record per line:
      -> {"op": "hello"}                         <- {"dim": N}
      -> {"op": "embed", "id": i, "texts": [..]} <- {"id": i, "vecs": [[..], ..]}
    Errors come back as {"id": i, "error": "msg"}.  Requests are
    serialized per process; run several adapters for parallelism.
    """

    def __init__(self, command: str | list[str]):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1
            )
        except OSError as exc:
            raise AdapterUnavailable(f"cannot start sidecar {argv!r}: {exc}") from exc
        self._next_id = 0
        self.model_name = f"sidecar:{argv[0]}"
        reply = self._roundtrip({"op": "hello"})
        if "dim" not in reply:
            raise AdapterUnavailable(f"sidecar handshake missing dim: {reply!r}")
        self.dim = int(reply["dim"])

    def _roundtrip(self, request: dict) -> dict:
        if self._proc.poll() is not None:
            raise AdapterUnavailable("sidecar process has exited")
        try:
            self._proc.stdin.write(json.dumps(request, separators=(",", ":")) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise AdapterUnavailable(f"sidecar pipe failed: {exc}") from exc
        if not line:
            raise AdapterUnavailable("sidecar closed its output stream")
        return json.loads(line)

    def embed_batch(self, fqdns: list[str]) -> np.ndarray:
        if not fqdns:
            return np.zeros((0, self.dim), dtype=np.float64)
        request_id = self._next_id
        self._next_id += 1
        reply = self._roundtrip({"op": "embed", "id": request_id, "texts": list(fqdns)})
        if "error" in reply:
            raise AdapterUnavailable(f"sidecar error: {reply['error']}")
        if reply.get("id") != request_id:
            raise AdapterUnavailable(
                f"sidecar answered id {reply.get('id')!r} for request {request_id}"
            )
        vecs = reply["vecs"]
        if len(vecs) != len(fqdns):
            raise AdapterUnavailable(
                f"sidecar returned {len(vecs)} vectors for {len(fqdns)} texts"
            )
        out = np.zeros((len(fqdns), self.dim), dtype=np.float64)
        for i, vec in enumerate(vecs):
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.dim,):
                raise DimensionMismatch(
                    f"sidecar vector {i} has dim {arr.shape}, handshake said {self.dim}"
                )
            out[i] = unit(arr)
        return out

    def embed(self, fqdn: str) -> np.ndarray:
        return self.embed_batch([fqdn])[0]

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)

    def __enter__(self) -> "SidecarEmbedder":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
