from .app import create_app
from .hub import RealtimeHub
from .store import ConfigStore, Role

__all__ = ["create_app", "RealtimeHub", "ConfigStore", "Role"]
