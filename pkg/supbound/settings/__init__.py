from .base import *
from .analysis import *
