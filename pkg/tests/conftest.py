import pytest
from hypothesis import settings, strategies as st

from venereau.exactpoly import Poly, RingSpec

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

R4 = RingSpec.of("x y z u")
R4L = RingSpec.of("x y z u", laurent="x")
PLANE = RingSpec.of("x v t xi")


def poly_st(ring, max_terms=5, max_exp=3, min_exp=0, coeff=20):
    """Random sparse polynomials in ``ring``; negative exponents only where allowed."""
    def exps():
        return st.tuples(*[
            st.integers(min_exp if lau else 0, max_exp) for lau in ring.laurent_flags
        ])
    terms = st.dictionaries(exps(), st.integers(-coeff, coeff), max_size=max_terms)
    return terms.map(lambda d: Poly(ring, {e: c for e, c in d.items() if c}))


@pytest.fixture
def ring4():
    return R4
