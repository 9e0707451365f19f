# -*- coding: utf-8 -*-
"""
torictriv
~~~~~~~~~

Exact trivialization of equivariant projective modules over affine toric
schemes with a diagonalizable group action.

:license: MIT

"""
import logging

__version__ = "0.1.0"

from . import lib

from .lib import (
    lattice,
    cone,
    monoid,
    errors,
    canonical_json,
    problem_hash,
    read_problem_from_file,
    read_certificate_from_file,
)

from .api.graded_algebra import CoeffRing, ToricGAlgebra, AlgebraElem, Localization
from .api.graded_linalg import GradedMatrix, GradedIdempotent, LocalGradedMatrix, find_basis
from .api.trivializer import (
    GActionProblem,
    TrivializationCertificate,
    PartialResult,
    trivialize,
    k0_class,
)
from .api.problem import load_problem, build_problem, certificate_document
from .api.verify import verify_certificate
from .cli import cli
