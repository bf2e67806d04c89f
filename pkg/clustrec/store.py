"""
Artifact store for clustrec.

Artifacts live at <root>/<kind>/<identifier>/<config-hash>.<ext> with a sha256
checksum stored alongside in <config-hash>.<ext>.sha256. Writes go to a temporary
file in the same directory and are renamed into place.

Matrix artifacts use a small container: one line of JSON header followed by
numpy .npy blocks (little-endian) in the order the header lists them.
"""

import hashlib
import io
import json
import logging
import os
import shutil
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import CorruptArtifact, IoError
from .models import ArtifactKey, ArtifactKind, StoredReceipt

logger = logging.getLogger(__name__)

EXTENSIONS: Dict[ArtifactKind, str] = {
    ArtifactKind.PERF_TABLE: "csv",
    ArtifactKind.GRAPH: "txt",
    ArtifactKind.NODE_FEATURES: "bin",
    ArtifactKind.EMBEDDING: "bin",
    ArtifactKind.GCNN_MODEL: "bin",
    ArtifactKind.RANKER_MODEL: "json",
    ArtifactKind.REPORT: "csv",
}

CHECKSUM_SUFFIX = ".sha256"
CONTAINER_MAGIC = b"CLUSTREC-ARRAYS 1\n"


def checksum(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def pack_arrays(header: Dict[str, Any], arrays: Dict[str, np.ndarray]) -> bytes:
    """Serialize a JSON header and named arrays into one payload."""
    buffer = io.BytesIO()
    meta = {"header": header, "arrays": list(arrays)}
    buffer.write(CONTAINER_MAGIC)
    buffer.write(json.dumps(meta, sort_keys=True).encode("utf-8") + b"\n")
    for array in arrays.values():
        array = np.asarray(array)
        if array.dtype.kind == "f":
            array = array.astype("<f8")
        elif array.dtype.kind in "iu":
            array = array.astype("<i8")
        np.lib.format.write_array(buffer, np.ascontiguousarray(array), allow_pickle=False)
    return buffer.getvalue()


def unpack_arrays(payload: bytes) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """Inverse of pack_arrays."""
    buffer = io.BytesIO(payload)
    if buffer.readline() != CONTAINER_MAGIC:
        raise CorruptArtifact("Payload is not an array container")
    try:
        meta = json.loads(buffer.readline().decode("utf-8"))
        arrays = {name: np.lib.format.read_array(buffer, allow_pickle=False) for name in meta["arrays"]}
    except (ValueError, KeyError) as e:
        raise CorruptArtifact(f"Malformed array container: {e}") from e
    return meta["header"], arrays


class ArtifactStore:
    """Checksummed file store addressed by ArtifactKey."""

    def __init__(self, root: Path):
        self.root = Path(root)

    def path_for(self, key: ArtifactKey) -> Path:
        return self.root / key.kind.value / key.identifier / f"{key.config_hash}.{EXTENSIONS[key.kind]}"

    def _atomic_write(self, path: Path, data: bytes):
        handle = tempfile.NamedTemporaryFile(dir=path.parent, prefix=f".{path.name}.", delete=False)
        try:
            with handle:
                handle.write(data)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(handle.name, path)
        except OSError:
            Path(handle.name).unlink(missing_ok=True)
            raise

    def put(self, key: ArtifactKey, payload: bytes) -> StoredReceipt:
        """
        Store a payload atomically.

        The checksum lands before the payload, so a reader racing a first write sees the
        key as absent. Each key has a single writer; a reader racing an overwrite with
        different bytes can see CorruptArtifact.

        Raises:
            IoError: If the files cannot be written
        """
        path = self.path_for(key)
        digest = checksum(payload)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            self._atomic_write(path.with_name(path.name + CHECKSUM_SUFFIX), digest.encode("ascii"))
            self._atomic_write(path, payload)
        except OSError as e:
            raise IoError(f"Cannot write artifact {key.prefix}: {e}") from e
        logger.debug(f"Stored {key.prefix} ({len(payload)} bytes)")
        return StoredReceipt(key=key, path=str(path), checksum=digest, size=len(payload))

    def get(self, key: ArtifactKey) -> Optional[bytes]:
        """
        Return the stored bytes, or None when absent.

        Raises:
            CorruptArtifact: If the checksum does not match
        """
        path = self.path_for(key)
        if not path.is_file():
            return None
        try:
            payload = path.read_bytes()
            sidecar = path.with_name(path.name + CHECKSUM_SUFFIX)
            expected = sidecar.read_text(encoding="ascii").strip() if sidecar.is_file() else None
        except OSError as e:
            raise IoError(f"Cannot read artifact {key.prefix}: {e}") from e
        if expected is None or checksum(payload) != expected:
            raise CorruptArtifact(f"Checksum mismatch for {key.prefix}")
        return payload

    def exists(self, key: ArtifactKey) -> bool:
        return self.path_for(key).is_file()

    def list_keys(self) -> List[ArtifactKey]:
        """Every stored key, sorted by path."""
        keys = []
        if not self.root.is_dir():
            return keys
        for kind in ArtifactKind:
            base = self.root / kind.value
            if not base.is_dir():
                continue
            suffix = f".{EXTENSIONS[kind]}"
            for path in sorted(base.glob(f"*/*{suffix}")):
                keys.append(ArtifactKey(kind=kind, identifier=path.parent.name, config_hash=path.name[:-len(suffix)]))
        return keys

    def invalidate(self, prefix: str = "") -> int:
        """
        Remove every artifact whose kind/identifier/hash path starts with the prefix components.

        Args:
            prefix: e.g. "perf_table", "perf_table/silhouette" or "" for everything

        Returns:
            Number of artifacts removed
        """
        parts = [part for part in prefix.strip("/").split("/") if part]
        removed = 0
        for key in self.list_keys():
            components = [key.kind.value, key.identifier, key.config_hash]
            if components[:len(parts)] != parts:
                continue
            path = self.path_for(key)
            try:
                path.unlink(missing_ok=True)
                path.with_name(path.name + CHECKSUM_SUFFIX).unlink(missing_ok=True)
            except OSError as e:
                raise IoError(f"Cannot remove {key.prefix}: {e}") from e
            removed += 1
            if not any(path.parent.iterdir()):
                shutil.rmtree(path.parent, ignore_errors=True)
        logger.info(f"Invalidated {removed} artifacts under '{prefix or '*'}'")
        return removed

    def verify_all(self) -> List[Tuple[ArtifactKey, bool]]:
        """Check every stored checksum."""
        results = []
        for key in self.list_keys():
            try:
                self.get(key)
                results.append((key, True))
            except CorruptArtifact:
                results.append((key, False))
        return results
