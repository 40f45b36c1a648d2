"""figrender CLI: render a recipe from a data directory."""

import argparse
import os
import sys

from .recipes import RecipeError, load_recipe, recipe_ids
from .render import render


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="figrender",
        description="Render a figure reproduction from ionchaos CSV output.",
    )
    parser.add_argument("recipe", nargs="?", help="bundled recipe id or recipe TOML path")
    parser.add_argument("--data", default=None,
                        help="data directory (default: $IONCHAOS_OUT or ./out)")
    parser.add_argument("--out", default=None, help="output image path (default <id>.png)")
    parser.add_argument("--list", action="store_true", help="list bundled recipes")
    args = parser.parse_args(argv)

    if args.list:
        print("\n".join(recipe_ids()))
        return 0
    if not args.recipe:
        parser.error("recipe required (or use --list)")
    data_dir = args.data or os.environ.get("IONCHAOS_OUT") or "out"
    try:
        recipe = load_recipe(args.recipe)
        out = args.out or f"{recipe.id}.png"
        render(recipe, data_dir, out)
    except RecipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
