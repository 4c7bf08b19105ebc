import argparse
from abc import ABC, abstractmethod

from core.config import Settings


class App(ABC):
    settings: Settings
    args: argparse.Namespace

    def __init__(self, settings: Settings, args: argparse.Namespace) -> None:
        self.settings = settings
        self.args = args

    @abstractmethod
    def run(self) -> int:
        """Runs the command and returns the process exit code."""
        raise NotImplementedError
