from .metrics import accuracy, weighted_f1
from .ranking import ScoreRecord, average_ranks, per_diff, rank_methods
from .wilcoxon import WilcoxonResult, midranks, signed_rank_exact_pvalue, wilcoxon
from .winmatrix import WinMatrix, build_win_matrix

__all__ = [name for name in dir() if not name.startswith("_")]
