"""Hypothesis strategies for small S5 Kripke models."""
import hypothesis.strategies as st

from kripke.utils import model_from_partitions


@st.composite
def s5_models(draw, atoms=('p', 'q', 'r'), agents=('a', 'b'), max_worlds=5):
    count = draw(st.integers(min_value=1, max_value=max_worlds))
    worlds = [f"w{index}" for index in range(count)]
    partitions = {}
    for agent in agents:
        labels = draw(st.lists(st.integers(min_value=0, max_value=count - 1), min_size=count, max_size=count))
        blocks = {}
        for world, label in zip(worlds, labels):
            blocks.setdefault(label, []).append(world)
        partitions[agent] = list(blocks.values())
    valuation = {atom: draw(st.sets(st.sampled_from(worlds))) for atom in atoms}
    return model_from_partitions(worlds, partitions, valuation)
