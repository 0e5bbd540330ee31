from sl2lab.app import Lab, create_lab
from sl2lab.command import Command
from sl2lab.constants import (
    CommandConfigError,
    HypothesisError,
    ImplementationBugError,
    Sl2LabError,
)
from sl2lab.gset import GroupSet
from sl2lab.param_functions import Flag, Option
from sl2lab.router import Router
from sl2lab.sl2 import SL2Elem, SL2Group, sl2_group
from sl2lab.word import Letter, Word
