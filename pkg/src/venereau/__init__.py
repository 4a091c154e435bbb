"""Exact polynomial algebra for Venereau polynomials and the alpha_n automorphisms."""

from .exactpoly import Poly, RingSpec, parse_poly, format_poly, substitute
from .endomap import PolyMap, build_alpha_n, compose, nagata
from .bundle import Certificate, TransitionFunction, search_certificate

__all__ = [
    "Poly", "RingSpec", "parse_poly", "format_poly", "substitute",
    "PolyMap", "build_alpha_n", "compose", "nagata",
    "Certificate", "TransitionFunction", "search_certificate",
]
