"""Handler modules."""
from .experiment_handler import ExperimentHandler

__all__ = [
	"ExperimentHandler",
]
