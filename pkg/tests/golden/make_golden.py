"""Regenerate the frozen regression fixtures in this directory.

Only rerun after a deliberate change to the generator or the rule; the test
suite checks these values against an independent serial oracle first.
"""

import json
from pathlib import Path

from algostable import GridSpec, LossWeights, MarketParams, sweep_grid

HERE = Path(__file__).parent


def main():
    surface = sweep_grid(MarketParams(0.0, 0.05, 100e6, 100), GridSpec(), LossWeights(1.0), 200, 0)
    cells = [
        {
            "A": a,
            "B": b,
            "mean_price": r.mean_price_component,
            "mean_supply": r.mean_supply_component,
            "std_error": r.std_error,
        }
        for (a, b), r in surface.cells.items()
    ]
    data = {"provenance": surface.provenance(), "cells": cells}
    (HERE / "default_surface.json").write_text(json.dumps(data, indent=1) + "\n")


if __name__ == "__main__":
    main()
