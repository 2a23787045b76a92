"""
CSV and manifest output for command-line runs.

Tables are written through pandas with a fixed float format and LF line
endings; every file is written to a temporary sibling and renamed into place.
The manifest records the command, its parameters, the seed, the constant set
and the SHA-256 of the CSV bytes.
"""

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional

import pandas as pd

from config.system_config import CLI_CONFIG, SYSTEM_CONFIG

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunManifest:
    """
    Attributes:
        command: Sub-command name
        parameters: Parsed flag values
        seed: RNG seed, or None for deterministic commands
        constant_set_version: Physical constant set tag
        output_checksum: SHA-256 hex digest of the CSV bytes
    """
    command: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    constant_set_version: str = CLI_CONFIG['constant_set_version']
    output_checksum: str = ''

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def resolve_output_path(path: str, config: Optional[Dict[str, Any]] = None) -> str:
    """Relative paths are placed under the configured output directory."""
    config = config or SYSTEM_CONFIG
    if os.path.isabs(path):
        return path
    return os.path.join(config.get('output_dir', '.'), path)


def render_csv(frame: pd.DataFrame, config: Optional[Dict[str, Any]] = None) -> bytes:
    config = config or CLI_CONFIG
    text = frame.to_csv(index=False, float_format=config.get('float_format', '%.12g'),
                        lineterminator=config.get('line_terminator', '\n'))
    return text.encode('utf-8')


def atomic_write(path: str, payload: bytes) -> None:
    """Write bytes to a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(handle, 'wb') as f:
            f.write(payload)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def write_run(frame: pd.DataFrame, path: str, manifest: RunManifest,
              config: Optional[Dict[str, Any]] = None) -> RunManifest:
    """
    Emit the CSV and its manifest.

    Args:
        frame: Table to write
        path: CSV destination
        manifest: Manifest without checksum

    Returns:
        Manifest with the checksum filled in
    """
    config = config or CLI_CONFIG
    payload = render_csv(frame, config)
    atomic_write(path, payload)
    manifest = RunManifest(command=manifest.command, parameters=manifest.parameters,
                           seed=manifest.seed, constant_set_version=manifest.constant_set_version,
                           output_checksum=hashlib.sha256(payload).hexdigest())
    manifest_path = path + config.get('manifest_suffix', '.manifest.json')
    atomic_write(manifest_path, manifest.to_json().encode('utf-8'))
    logger.info(f"Wrote {len(frame)} rows to {path} (sha256 {manifest.output_checksum[:12]})")
    return manifest
