import random

from hypothesis import HealthCheck, settings, strategies as st

from tx10.generate import random_stmt

settings.register_profile("tx10", deadline=None, max_examples=150,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("tx10")


@st.composite
def statements(draw, max_nodes=8, places=3, dynamic=False):
    seed = draw(st.integers(0, 2**32 - 1))
    budget = draw(st.integers(1, max_nodes))
    return random_stmt(random.Random(seed), budget, places, dynamic=dynamic)
