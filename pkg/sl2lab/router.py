from __future__ import annotations

from typing import Callable, Optional

from sl2lab.command import Command
from sl2lab.constants import CommandConfigError
from sl2lab.model_field import ModelField


class Router:
    def __init__(self, commands: Optional[list[Command]] = None):
        self.commands: list[Command] = commands or []

    def command(
        self,
        name: Optional[str] = None,
        summary: str = "",
        description: str = "",
        params: Optional[list[ModelField]] = None,
    ) -> Callable:
        """Register the decorated function as a subcommand.

        The name defaults to the function name with dashes for underscores.
        """

        def decorator(func: Callable) -> Callable:
            command = Command(
                name or func.__name__.replace("_", "-"),
                func,
                summary=summary,
                description=description,
                params=params,
            )
            self.add_command(command)
            return func

        return decorator

    def add_router(self, router: Router, prefix: str = "") -> None:
        for command in router.commands:
            command.add_prefix(prefix)
            self.add_command(command)

    def add_command(self, command: Command) -> None:
        if any(existing.name == command.name for existing in self.commands):
            raise CommandConfigError(f"Command {command.name!r} registered twice.")
        self.commands.append(command)

    def get(self, name: str) -> Command:
        for command in self.commands:
            if command.name == name:
                return command
        raise CommandConfigError(f"Unknown command {name!r}.")
