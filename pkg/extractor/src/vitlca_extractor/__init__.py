"""ViT-B/16 CLS-embedding exporter for the ".vlca" dataset format."""

from .extract import ExtractionConfig, extract, select_subset
from .writer import write_vlca

__version__ = "0.1.0"
