"""
Worked-example converter configurations.

Usage:
    python -m fsikit.seeds.seed --out configs/

Or programmatically:
    from fsikit.seeds import ExampleFactory

    cfg = ExampleFactory.example2(0.18)
"""

from .factories import ExampleFactory
from .seed import ConfigSeeder

__all__ = ["ExampleFactory", "ConfigSeeder"]
