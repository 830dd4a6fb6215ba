"""JSON project configuration: site, load model, design-space bounds.

One file describes a whole exploration campaign.  Schema (all SI units):

    {
      "site": {
        "sp": [x, y], "ep": [x, y],            # chord endpoints (m)
        "deck_elevation": m, "ground_elevation": m,
        "street_corridor": [lo, hi],           # interval along the chord (m)
        "required_clearance": m,
        "trees": [[cx, cy, radius], ...],      # plan circles (m)
        "width_b": m
      },
      "loads": {
        "concrete_unit_weight": kN/m3, "live_load_area": kPa,
        "uls_factors": [gamma_G, gamma_Q], "sls_factors": [g, q],
        "deflection_limit_ratio": span/delta, "sigma_allow": MPa,
        "E_modulus": GPa, "unit_cost": CHF/m3
      },
      "design_space": {"lower": [6 values], "upper": [6 values],
                       "sample_count": int}
    }

Missing sections fall back to the packaged defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .geometry import DesignSpace, SiteConfig
from .simulator import LoadModel


@dataclass(frozen=True)
class ProjectConfig:
    site: SiteConfig
    loads: LoadModel
    design_space: DesignSpace

    def to_dict(self) -> dict:
        return {
            "site": self.site.to_dict(),
            "loads": self.loads.to_dict(),
            "design_space": self.design_space.to_dict(),
        }

    def content_hash(self) -> str:
        """Stable hash of the full configuration (hex SHA-256)."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _default_dict() -> dict:
    raw = resources.files("footbridge.data").joinpath("default_config.json").read_text()
    return json.loads(raw)


def config_from_dict(d: dict) -> ProjectConfig:
    base = _default_dict()
    merged = {key: {**base[key], **d.get(key, {})} for key in base}
    return ProjectConfig(
        site=SiteConfig.from_dict(merged["site"]),
        loads=LoadModel.from_dict(merged["loads"]),
        design_space=DesignSpace.from_dict(merged["design_space"]),
    )


def load_config(path: str | Path | None = None) -> ProjectConfig:
    """Load a project config file; with no path, the packaged defaults."""
    if path is None:
        return config_from_dict({})
    text = Path(path).read_text()
    return config_from_dict(json.loads(text))
