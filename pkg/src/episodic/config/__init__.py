"""Configuration module for episodic."""

from episodic.config.settings import Settings, settings

__all__ = ["Settings", "settings"]
