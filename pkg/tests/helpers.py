"""Independent generators shared by the test modules."""
import random

from cascademorph.cascade import ActionEvent, FollowerGraph, build_cascade


def random_dyck(rnd: random.Random, n_pairs: int) -> tuple[int, ...]:
    """Uniform-ish random balanced code built step by step."""
    bits = []
    opened = depth = 0
    while len(bits) < 2 * n_pairs:
        can_open = opened < n_pairs
        can_close = depth > 0
        if can_open and (not can_close or rnd.random() < 0.5):
            bits.append(1)
            opened += 1
            depth += 1
        else:
            bits.append(0)
            depth -= 1
    return tuple(bits)


def random_cascade(rnd: random.Random, n_users: int = 15, p_edge: float = 0.2):
    users = [f"u{i}" for i in range(n_users)]
    edges = [(u, v) for u in users for v in users if u != v and rnd.random() < p_edge]
    fg = FollowerGraph.from_edges(edges, nodes=users)
    k = rnd.randint(1, n_users)
    actors = rnd.sample(users, k)
    events = [ActionEvent("c", u, rnd.randint(0, 3 * k)) for u in actors]
    return build_cascade(fg, events)
