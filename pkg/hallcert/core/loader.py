"""YAML manifest and run-config loader."""

from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from .models import Manifest, RunConfig


class ManifestLoader:
    """Loads and manages batch manifests from YAML files."""

    def __init__(self):
        self.manifests: List[Manifest] = []
        self._lookup: Dict[str, Manifest] = {}

    def load_builtin_manifests(self) -> None:
        """Load the manifests shipped in the package's manifests/ directory."""
        manifest_dir = Path(__file__).parent.parent / "manifests"
        for yaml_file in sorted(manifest_dir.glob("*.yml")):
            self.load_manifest(yaml_file)

    def load_manifest(self, yaml_path: Path) -> Manifest:
        """Load a single manifest from a YAML file."""
        try:
            with open(yaml_path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
            data.setdefault("meta", {"name": Path(yaml_path).stem})
            data["instances"] = data.get("instances") or []
            manifest = Manifest(**data)
        except Exception as e:
            raise ValueError(f"Failed to load manifest from {yaml_path}: {e}")

        # Unnamed rows get their position, so CSV rows stay identifiable.
        for i, row in enumerate(manifest.instances):
            if row.name is None:
                row.name = f"{manifest.meta.name}-{i + 1}"
        self.manifests.append(manifest)
        self._lookup[manifest.meta.name] = manifest
        return manifest

    def get_manifest(self, name: str) -> Optional[Manifest]:
        return self._lookup.get(name)

    def get_all_names(self) -> List[str]:
        return list(self._lookup.keys())

    def resolve(self, name_or_path: str) -> Manifest:
        """A built-in manifest by name, or a manifest file by path."""
        if Path(name_or_path).exists():
            return self.load_manifest(Path(name_or_path))
        if not self._lookup:
            self.load_builtin_manifests()
        manifest = self.get_manifest(name_or_path)
        if manifest is None:
            raise ValueError(f"No manifest named {name_or_path!r}. Known: {self.get_all_names()}")
        return manifest


def load_config(yaml_path: Path, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """A RunConfig from a YAML file whose keys mirror the CLI flags; explicit flags win."""
    try:
        with open(yaml_path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except Exception as e:
        raise ValueError(f"Failed to load config from {yaml_path}: {e}")
    if not isinstance(data, dict):
        raise ValueError(f"Config file {yaml_path} must hold a mapping, got {type(data).__name__}")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**data)
