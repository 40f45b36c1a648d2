"""Render figure reproductions from ionchaos CSV output directories.

Pure CSV-to-image transforms: every number plotted comes from the data
files, never from recomputation, and each recipe validates the run
manifest before touching the data.
"""

__version__ = "0.1.0"

from .recipes import FigureRecipe, RecipeError, load_recipe, recipe_ids
from .render import render

__all__ = ["FigureRecipe", "RecipeError", "load_recipe", "recipe_ids", "render"]
