"""Configuration module"""
from .settings import settings, Settings, PROJECT_ROOT

__all__ = ["settings", "Settings", "PROJECT_ROOT"]
