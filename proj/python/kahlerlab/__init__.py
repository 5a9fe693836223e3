"""Generalized Calabi functionals on circle-symmetric Kahler geometries."""

import json as _json

from . import _core
from ._core import (
    AdmissibilityError,
    ConvergenceError,
    DomainError,
    Geometry,
    KahlerError,
    NoCriticalMetric,
    ParseError,
    PathExitsClass,
    Profile,
    RangeError,
    SingularPotential,
    delta_S,
    descriptor_value,
    equivariant_integral,
    eval_S,
    futaki,
    render_descriptor,
    run_cli,
)

__all__ = [
    "AdmissibilityError",
    "ConvergenceError",
    "DomainError",
    "Geometry",
    "KahlerError",
    "NoCriticalMetric",
    "ParseError",
    "PathExitsClass",
    "Profile",
    "RangeError",
    "SingularPotential",
    "class_constants",
    "delta_S",
    "descriptor_value",
    "el_report",
    "equivariant_integral",
    "eval_S",
    "futaki",
    "iterate",
    "pin_fubini_study",
    "render_descriptor",
    "run_cli",
    "solve_critical",
]


def class_constants(geometry):
    """Total volume, total scalar curvature and mean scalar curvature s0."""
    return _json.loads(geometry.class_constants())


def el_report(profile, f, h, phi_target=None, phi_scale=1.0, tol_affine=1e-8):
    """Affine fit and defects of the EL potential psi = f'(s) h(phi)."""
    return _json.loads(_core.el_report(profile, f, h, phi_target, phi_scale, tol_affine))


def solve_critical(geometry, f, h, phi_target=None, phi_scale=1.0):
    """Critical metric by shooting; returns (report dict, Profile)."""
    text, profile = _core.solve_critical(geometry, f, h, phi_target, phi_scale)
    return _json.loads(text), profile


def iterate(geometry, f, h, phi_target=None, max_steps=5):
    """Sequence of critical metrics and fields as a trace dict."""
    return _json.loads(_core.iterate(geometry, f, h, phi_target, max_steps))


def pin_fubini_study(m, nodes=129):
    """Fubini-Study oracle for the CP^m base term."""
    return _json.loads(_core.pin_fubini_study(m, nodes))
