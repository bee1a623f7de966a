"""On-disk catalog cache keyed by the content hash of the model configuration."""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

from .catalog import Catalog
from .errors import InternalConsistencyError
from .quiver import ModelConfig

log = logging.getLogger(__name__)

SCHEMA = "finhall-catalog/1"


def _digest(payload) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def cache_path(cache_dir, config: ModelConfig) -> Path:
    return Path(cache_dir) / f"catalog-{config.content_hash()[:16]}.json"


def write_cache(path, catalog: Catalog):
    payload = {"config_hash": catalog.config.content_hash(), "grades": catalog.to_store()}
    doc = {"schema": SCHEMA, **payload, "sha256": _digest(payload)}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
    tmp.replace(path)


def read_cache(path, config: ModelConfig):
    """Return a Catalog from the file, or None if it is missing, foreign or corrupted."""
    path = Path(path)
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text())
        payload = {"config_hash": doc["config_hash"], "grades": doc["grades"]}
        if doc.get("schema") != SCHEMA or doc.get("sha256") != _digest(payload):
            log.warning("catalog cache %s failed its checksum; rebuilding", path)
            return None
        if doc["config_hash"] != config.content_hash():
            log.warning("catalog cache %s belongs to another configuration; rebuilding", path)
            return None
        stored = {tuple(g["dims"]): (g["labels"], g["classes"]) for g in doc["grades"]}
        catalog = Catalog(config, stored=stored)
    except (ValueError, KeyError, TypeError, InternalConsistencyError) as exc:
        log.warning("catalog cache %s unreadable (%s); rebuilding", path, exc)
        return None
    if not all(catalog.verify_checksums().values()):
        log.warning("catalog cache %s failed the orbit checksum; rebuilding", path)
        return None
    return catalog


def load_or_build(config: ModelConfig, cache_dir=None):
    """Return (catalog, status) with status one of 'hit', 'built', 'rebuilt', 'uncached'."""
    if cache_dir is None:
        return Catalog(config), "uncached"
    path = cache_path(cache_dir, config)
    existed = path.exists()
    catalog = read_cache(path, config)
    if catalog is not None:
        return catalog, "hit"
    catalog = Catalog(config)
    if not all(catalog.verify_checksums().values()):
        raise InternalConsistencyError("orbit checksum failed after enumeration")
    write_cache(path, catalog)
    return catalog, "rebuilt" if existed else "built"
