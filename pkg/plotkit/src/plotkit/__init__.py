"""Batch renderer for cavom experiment datasets."""

__version__ = "0.1.0"

from .recipes import (FIGURE_IDS, FigureRecipe, MissingDataset, SchemaMismatch,
                      render)
