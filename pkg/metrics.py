"""
QCStar Residual Statistics
Collects labelled residual samples of a run and summarizes them.
"""
import json
from typing import List, Dict, Optional
from datetime import datetime
from pathlib import Path
import numpy as np


class ResidualTracker:
    """Tracks residual samples (stencil residuals, consistency checks, identity errors)"""

    def __init__(self, metrics_file: Optional[str] = None):
        self.metrics_file = Path(metrics_file) if metrics_file else None
        self.samples: List[Dict] = []
        if self.metrics_file is not None:
            self.metrics_file.parent.mkdir(parents=True, exist_ok=True)
            self.load_metrics()

    def load_metrics(self):
        """Load samples from file"""
        if self.metrics_file is not None and self.metrics_file.exists():
            with open(self.metrics_file, 'r') as f:
                data = json.load(f)
                self.samples = data.get('samples', [])

    def save_metrics(self):
        """Save samples to file"""
        if self.metrics_file is None:
            return
        data = {
            'samples': self.samples,
            'summary': self.summary(),
            'last_updated': datetime.now().isoformat()
        }
        with open(self.metrics_file, 'w') as f:
            json.dump(data, f, indent=2)

    def track(self, label: str, residual: float, metadata: dict = None):
        """
        Record one residual.

        Args:
            label: Group label (e.g. "g'", "site", "inversion")
            residual: Non-negative residual value
            metadata: Additional context
        """
        self.samples.append({
            'label': label,
            'residual': float(residual),
            'metadata': metadata or {}
        })

    def track_many(self, label: str, residuals, metadata: dict = None):
        """Record an iterable of residuals under one label"""
        for r in residuals:
            self.track(label, r, metadata)

    def values(self, label: Optional[str] = None) -> np.ndarray:
        """Residual values, optionally restricted to one label"""
        return np.array([s['residual'] for s in self.samples
                         if label is None or s['label'] == label], dtype=float)

    def summary(self, label: Optional[str] = None) -> Dict:
        """Summary statistics of the tracked residuals"""
        values = self.values(label)
        if values.size == 0:
            return {
                'count': 0,
                'max': None,
                'mean': None,
                'median': None,
                'p95': None,
                'log10_max': None
            }
        finite = values[np.isfinite(values)]
        worst = float(np.max(values))
        return {
            'count': int(values.size),
            'max': worst,
            'mean': float(np.mean(finite)) if finite.size else None,
            'median': float(np.median(finite)) if finite.size else None,
            'p95': float(np.percentile(finite, 95)) if finite.size else None,
            'log10_max': float(np.log10(worst)) if 0 < worst < np.inf else None
        }

    def summary_by_label(self) -> Dict[str, Dict]:
        """Summary statistics per label"""
        labels = sorted({s['label'] for s in self.samples})
        return {label: self.summary(label) for label in labels}

    def fraction_below(self, threshold: float, label: Optional[str] = None) -> float:
        """Fraction of residuals strictly below a threshold"""
        values = self.values(label)
        if values.size == 0:
            return 0.0
        return float(np.mean(values < threshold))

    def clear(self):
        """Drop all samples"""
        self.samples = []
        self.save_metrics()
