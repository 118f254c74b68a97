"""Weight-preserving quantum circuits, sector numerics and reductions."""
