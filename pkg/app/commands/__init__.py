"""Command modules."""
from .experiment_commands import register_experiment_commands, run_experiment

__all__ = [
	"register_experiment_commands",
	"run_experiment",
]
