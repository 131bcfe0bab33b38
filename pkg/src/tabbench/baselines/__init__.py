from .gbt import GBT_GRID, GbtModel, Tree, build_tree, fit_gbt, grid_points, train_gbt
from .logreg import L2_GRID, LogRegModel, fit_logreg, train_logreg

__all__ = [name for name in dir() if not name.startswith("_")]
