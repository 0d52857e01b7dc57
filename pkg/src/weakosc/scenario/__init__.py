from .config import Kind, ParseError, ScenarioConfig, ValidationError, config_hash, from_dict, load
from .runner import ResultRecord, run, sweep

__all__ = ["Kind", "ParseError", "ScenarioConfig", "ValidationError", "config_hash", "from_dict", "load",
           "ResultRecord", "run", "sweep"]
