from .console_components import ConsoleComponents
from .command_manager import CommandManager

__all__ = ['ConsoleComponents', 'CommandManager']
