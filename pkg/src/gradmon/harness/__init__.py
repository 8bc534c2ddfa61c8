from .config import RunConfig, NetSpec, default_config, load_config, apply_overrides
from .runner import run_training, evaluate, compare, final_window_mean
from .checkpoint import save_checkpoint, load_checkpoint

__all__ = [
    "RunConfig", "NetSpec", "default_config", "load_config", "apply_overrides",
    "run_training", "evaluate", "compare", "final_window_mean",
    "save_checkpoint", "load_checkpoint",
]
