"""Real-time conversation-assist engine with a deterministic replay harness.

The package splits into a live path and an evaluation path. The live path
(`engine`, `server`, `protocol`) runs one session per connection: transcripts
stream in, hint text comes back from a pluggable provider, and a face-anchored
text panel is placed, shifted, and toggled from gaze input. The evaluation
path (`analytics`, `harness`) replays scripted scenarios on a simulated clock
and measures reading time, speech amount, and turn-taking.
"""

from .config import (CONDITION_FACE, CONDITION_FIXED, PROTO_VERSION, EngineConfig,
                     engine_config_from_dict, load_config)
from .engine import SessionEngine

__version__ = "0.1.0"

__all__ = [
    "CONDITION_FACE",
    "CONDITION_FIXED",
    "PROTO_VERSION",
    "EngineConfig",
    "SessionEngine",
    "engine_config_from_dict",
    "load_config",
    "__version__",
]
