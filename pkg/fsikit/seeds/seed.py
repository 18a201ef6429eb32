"""
Writes the worked-example configurations as YAML files.

Usage:
    python -m fsikit.seeds.seed --out configs/
"""

import sys
from pathlib import Path
from typing import Dict, List, Optional

from fsikit.core.exceptions import FsiError
from fsikit.schemas.converter import ConverterConfig
from fsikit.seeds.factories import ExampleFactory
from fsikit.services.config_service import ConfigService
from fsikit.services.export_service import ExportService


class ConfigSeeder:
    """Emits every catalog config into one directory."""

    def __init__(self, out_dir: Path, overwrite: bool = False):
        self.out_dir = Path(out_dir)
        self.overwrite = overwrite
        self.written: List[Path] = []
        self.skipped: List[Path] = []

    def seed_config(self, name: str, cfg: ConverterConfig) -> Optional[Path]:
        path = self.out_dir / f"{name}.yaml"
        if path.exists() and not self.overwrite:
            print(f"   ⚠️  {path.name} already exists, skipping")
            self.skipped.append(path)
            return None
        header = f"# {name}: {cfg.topology.value} {cfg.scheme.value}\n"
        ExportService.write_atomic(path, header + ConfigService.emit_config(cfg))
        self.written.append(path)
        return path

    def run(self, catalog: Optional[Dict[str, ConverterConfig]] = None) -> bool:
        print(f"🌱 Writing example configs to {self.out_dir}/")
        for name, cfg in (catalog or ExampleFactory.catalog()).items():
            try:
                self.seed_config(name, cfg)
            except (FsiError, OSError) as e:
                print(f"   ❌ Error writing '{name}': {e}")
                return False
        print(f"   ✅ Wrote {len(self.written)} configs, skipped {len(self.skipped)}")
        return True


def main(argv: Optional[List[str]] = None) -> None:
    """Entry point for the seeding script."""
    import argparse

    parser = argparse.ArgumentParser(description="Write the worked-example converter configs")
    parser.add_argument("--out", default="configs", help="Output directory")
    parser.add_argument("--force", action="store_true", help="Overwrite existing files")
    args = parser.parse_args(argv)

    if ConfigSeeder(Path(args.out), overwrite=args.force).run():
        print("\n✅ Done")
        sys.exit(0)
    print("\n❌ Seeding failed")
    sys.exit(1)


if __name__ == "__main__":
    main()
