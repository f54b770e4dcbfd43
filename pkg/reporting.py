"""
QCStar Run Reports
Metadata headers and JSON/CSV writers for every command output.
"""
import json
from dataclasses import dataclass, field, asdict
from datetime import datetime, date
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd

from config import VERSION
from logging_setup import logger

SCHEMA_VERSION = "1.0"


class ComplexEncoder(json.JSONEncoder):
    """Handle complex numbers, numpy values and datetimes"""

    def default(self, obj):
        if isinstance(obj, (complex, np.complexfloating)):
            return [float(obj.real), float(obj.imag)]
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, (datetime, date)):
            return obj.isoformat()
        return super().default(obj)


def encode_complex_array(values) -> list:
    """Complex vector as a list of [re, im] pairs"""
    return [[float(np.real(v)), float(np.imag(v))] for v in np.asarray(values).ravel()]


def decode_complex_array(pairs) -> np.ndarray:
    """Inverse of encode_complex_array"""
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


@dataclass
class RunMetadata:
    """Header attached to every output file"""
    command: str
    seed: Optional[int]
    config_hash: str
    version: str = VERSION
    tool: str = "qcstar"
    timestamp: Optional[datetime] = field(default=None)

    def to_dict(self) -> Dict:
        data = asdict(self)
        data['timestamp'] = self.timestamp.isoformat() if self.timestamp else None
        data['schema_version'] = SCHEMA_VERSION
        return data

    @classmethod
    def create(cls, command: str, seed: Optional[int], config_hash: str,
               deterministic: bool = True) -> "RunMetadata":
        return cls(command=command, seed=seed, config_hash=config_hash,
                   timestamp=None if deterministic else datetime.now())


def dumps_report(payload: Dict, metadata: RunMetadata) -> str:
    """Serialize a result with its metadata header"""
    return json.dumps({'metadata': metadata.to_dict(), 'result': payload},
                      indent=2, sort_keys=True, cls=ComplexEncoder)


def write_json(payload: Dict, metadata: RunMetadata, path: Union[str, Path]) -> Path:
    """Write a JSON report"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(payload, metadata) + "\n")
    logger.info(f"[REPORT] Wrote {path}")
    return path


def write_csv(frame: pd.DataFrame, metadata: RunMetadata, path: Union[str, Path]) -> Path:
    """Write a CSV table preceded by '#'-prefixed metadata lines"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = "".join(f"# {key}: {value}\n" for key, value in metadata.to_dict().items())
    path.write_text(header + frame.to_csv(index=False, float_format="%.12g"))
    logger.info(f"[REPORT] Wrote {path} ({len(frame)} rows)")
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read a CSV written by write_csv"""
    return pd.read_csv(path, comment="#")
