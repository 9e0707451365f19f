from . import errors, schemas, lattice, cone, monoid
from .io import *
from .checks import *
