"""Figure recipes: what to read, how to arrange it, what to expect.

A recipe is a TOML document naming the input CSVs per panel and the
scenario parameters the data's manifest must carry.  Validation happens
before any rendering; a parameter mismatch reports the full diff so a
stale or regenerated data directory is caught immediately.
"""

from dataclasses import dataclass
import glob
import json
import os
from importlib import resources

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python 3.10
    import tomli as _toml

PANEL_KINDS = ("scatter", "lines", "spectrum", "probabilities", "expectation")


class RecipeError(Exception):
    """Bad recipe file or data directory that does not match it."""


@dataclass(frozen=True)
class Panel:
    label: str
    inputs: tuple


@dataclass(frozen=True)
class FigureRecipe:
    id: str
    kind: str
    title: str
    xlabel: str
    ylabel: str
    ncols: int
    expect: dict
    panels: tuple

    def validate_data_dir(self, data_dir):
        """Check the manifest and resolve every referenced CSV.

        Returns {panel_index: [paths]} on success; raises RecipeError
        with the offending manifest diff or missing file otherwise.
        """
        manifest_path = os.path.join(data_dir, "manifest.json")
        if not os.path.exists(manifest_path):
            raise RecipeError(f"no manifest.json in {data_dir}")
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        scenario = manifest.get("scenario", {})
        found = {
            "name": manifest.get("name"),
            "kind": scenario.get("kind"),
            "epsilons": scenario.get("epsilons"),
            "eta": scenario.get("params", {}).get("eta"),
            "N": scenario.get("params", {}).get("N"),
            "delta": scenario.get("params", {}).get("delta"),
        }
        diffs = []
        for key, want in self.expect.items():
            if found.get(key) != want:
                diffs.append(f"  {key}: expected {want!r}, manifest has {found.get(key)!r}")
        if diffs:
            raise RecipeError(
                f"data in {data_dir} does not match recipe {self.id!r}:\n"
                + "\n".join(diffs)
            )
        outputs = set(manifest.get("outputs", {}))
        resolved = {}
        for i, panel in enumerate(self.panels):
            paths = []
            for pattern in panel.inputs:
                matches = sorted(glob.glob(os.path.join(data_dir, pattern)))
                if not matches:
                    raise RecipeError(
                        f"recipe {self.id!r} panel {panel.label!r}: no file matches "
                        f"{pattern!r} in {data_dir}"
                    )
                for path in matches:
                    if os.path.basename(path) not in outputs:
                        raise RecipeError(
                            f"{os.path.basename(path)} is not listed in the manifest "
                            f"of {data_dir}; stale file?"
                        )
                paths.extend(matches)
            resolved[i] = paths
        return resolved


def _parse(doc, source):
    for key in ("id", "kind", "title", "panels"):
        if key not in doc:
            raise RecipeError(f"{source}: recipe is missing {key!r}")
    if doc["kind"] not in PANEL_KINDS:
        raise RecipeError(f"{source}: unknown panel kind {doc['kind']!r}")
    panels = []
    for entry in doc["panels"]:
        inputs = entry.get("inputs", [])
        if not inputs:
            raise RecipeError(f"{source}: panel {entry.get('label')!r} has no inputs")
        panels.append(Panel(label=entry.get("label", ""), inputs=tuple(inputs)))
    if not panels:
        raise RecipeError(f"{source}: recipe has no panels")
    return FigureRecipe(
        id=doc["id"],
        kind=doc["kind"],
        title=doc["title"],
        xlabel=doc.get("xlabel", ""),
        ylabel=doc.get("ylabel", ""),
        ncols=int(doc.get("ncols", 2)),
        expect=dict(doc.get("expect", {})),
        panels=tuple(panels),
    )


def _bundled():
    return resources.files("figrender") / "recipes"


def recipe_ids():
    """Identifiers of the bundled recipes."""
    return sorted(p.name[:-5] for p in _bundled().iterdir() if p.name.endswith(".toml"))


def load_recipe(target):
    """Load a recipe by bundled id or from an explicit TOML path."""
    if os.path.exists(target):
        with open(target, "rb") as fh:
            return _parse(_toml.load(fh), target)
    candidate = _bundled() / f"{target}.toml"
    if candidate.is_file():
        return _parse(_toml.loads(candidate.read_text()), f"recipe {target!r}")
    raise RecipeError(
        f"{target!r} is neither a recipe file nor a bundled id (have: {', '.join(recipe_ids())})"
    )
